//! The subconstituent algebra at a base vertex and its standard-module
//! decomposition.
//!
//! Fixing a vertex x, the dual idempotents are the diagonal indicators of
//! the distance cells around x and the dual adjacency matrix is the diagonal
//! matrix with entries |X|·(E_1)_{x,y}.  Together with the adjacency matrix
//! these generate the subconstituent algebra T; its commutant is computed
//! blockwise (any matrix commuting with the dual idempotents is
//! cell-block-diagonal), and the standard module is split by eigenspaces of
//! a random Hermitian commutant element.

use crate::graph::DistanceRegularData;
use crate::linalg::{self, CMat, CVec, C64};
use crate::spectral::{QPolyOrdering, SpectralData};
use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TModuleError {
    #[error("dual adjacency is not constant on distance cell {cell} (spread {spread:.3e})")]
    CellVariation { cell: usize, spread: f64 },
    #[error("dual eigenvalues {i} and {j} collide ({value:.6}); this ordering is unusable at the base vertex")]
    DualEigenvalueCollision { i: usize, j: usize, value: f64 },
    #[error("algebra closure exceeded the dimension cap {cap}")]
    ClosureCapExceeded { cap: usize },
    #[error("commutant basis failed verification (worst commutator {0:.3e})")]
    CommutantDefect(f64),
    #[error("module decomposition failed after {attempts} seeded attempts: {reason}")]
    IrreducibilityFailure { attempts: usize, reason: String },
    #[error("module eigenspace support on the {side} side is not contiguous: {ranks:?}")]
    NonContiguousSupport { side: &'static str, ranks: Vec<usize> },
    #[error("module diameter mismatch: d = {d} on the dual side but d* = {d_star} on the primal side")]
    DiameterMismatch { d: usize, d_star: usize },
    #[error("module {0} is not thin")]
    NonThinModule(usize),
    #[error("modules {a} and {b} share parameter arrays across distinct profiles")]
    AmbiguousGrouping { a: usize, b: usize },
    #[error("type projector {type_id} fails to commute with the generators (defect {defect:.3e})")]
    ProjectorNotCentral { type_id: usize, defect: f64 },
}

/// Dual structure of the standard module at a fixed base vertex.
#[derive(Debug, Clone)]
pub struct DualData {
    pub vertex: usize,
    /// Distance cells Γ_0(x), ..., Γ_D(x).
    pub cells: Vec<Vec<usize>>,
    /// Diagonal 0/1 projectors onto the distance cells.
    pub dual_idempotents: Vec<CMat>,
    /// A*_i = |X| · diag((E_i)_{x,·}) in the Q-polynomial order.
    pub dual_distance: Vec<CMat>,
    /// A* = A*_1.
    pub dual_adjacency: CMat,
    /// θ*_0, ..., θ*_D read off the diagonal of A* cell by cell.
    pub dual_eigenvalues: Vec<f64>,
}

/// Builds the dual idempotents, dual distance matrices, and dual adjacency
/// matrix at `vertex`, using the idempotent order fixed by `ordering`.
pub fn build_dual_data(
    spec: &SpectralData,
    ordering: &QPolyOrdering,
    data: &DistanceRegularData,
    vertex: usize,
    tol: f64,
) -> Result<DualData, TModuleError> {
    let n = spec.n;
    let full = ordering.full();
    let cells = data.cells(vertex);
    let dd = cells.len();

    let dual_idempotents: Vec<CMat> = (0..dd)
        .map(|i| {
            CMat::from_fn(n, n, |y, z| {
                if y == z && data.dist[vertex][y] == i {
                    linalg::ONE
                } else {
                    linalg::ZERO
                }
            })
        })
        .collect();

    let nf = Complex::new(n as f64, 0.0);
    let dual_distance: Vec<CMat> = full
        .iter()
        .map(|&k| {
            let e = &spec.idempotents[k];
            CMat::from_fn(n, n, |y, z| if y == z { e[(vertex, y)] * nf } else { linalg::ZERO })
        })
        .collect();
    let dual_adjacency = dual_distance[1].clone();

    // θ*_i must be constant on each distance cell; certify and average.
    let mut dual_eigenvalues = Vec::with_capacity(dd);
    let scale = 1.0 + linalg::fro_norm(&dual_adjacency);
    for (i, cell) in cells.iter().enumerate() {
        let samples: Vec<C64> = cell.iter().map(|&y| dual_adjacency[(y, y)]).collect();
        let mean = samples.iter().sum::<C64>() / Complex::new(samples.len() as f64, 0.0);
        let spread = samples
            .iter()
            .fold(0.0f64, |m, s| m.max((s - mean).norm()));
        if spread > tol * scale {
            return Err(TModuleError::CellVariation { cell: i, spread });
        }
        dual_eigenvalues.push(mean.re);
    }

    let gap = 1e-7
        * (1.0
            + dual_eigenvalues
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs())));
    for i in 0..dd {
        for j in i + 1..dd {
            if (dual_eigenvalues[i] - dual_eigenvalues[j]).abs() <= gap {
                return Err(TModuleError::DualEigenvalueCollision {
                    i,
                    j,
                    value: dual_eigenvalues[i],
                });
            }
        }
    }

    Ok(DualData {
        vertex,
        cells,
        dual_idempotents,
        dual_distance,
        dual_adjacency,
        dual_eigenvalues,
    })
}

/// Frobenius-orthonormal basis of a unital matrix algebra.
#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    pub basis: Vec<CMat>,
}

impl AlgebraBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Frobenius distance from `target` to the span of the basis.
    pub fn projection_residual(&self, target: &CMat) -> f64 {
        let proj = linalg::project_onto_span(&self.basis, target);
        linalg::fro_norm(&(target - proj))
    }
}

const GS_TOL: f64 = 1e-9;

/// Closes `generators` (plus the identity) under multiplication, keeping a
/// Frobenius-orthonormal basis.  Word growth is breadth-first and
/// deterministic; `cap` bounds the dimension (n² always suffices).
pub fn algebra_closure(generators: &[CMat], cap: usize, _tol: f64) -> Result<AlgebraBasis, TModuleError> {
    let n = generators
        .first()
        .map(|g| g.nrows())
        .expect("at least one generator");
    let mut basis: Vec<CMat> = Vec::new();
    let mut queue: Vec<CMat> = Vec::new();

    let push = |basis: &mut Vec<CMat>, queue: &mut Vec<CMat>, cand: &CMat| -> Result<(), TModuleError> {
        if let Some(next) = linalg::orthonormal_complement(basis, cand, GS_TOL) {
            if basis.len() + 1 > cap {
                return Err(TModuleError::ClosureCapExceeded { cap });
            }
            basis.push(next.clone());
            queue.push(next);
        }
        Ok(())
    };

    push(&mut basis, &mut queue, &linalg::identity(n))?;
    for g in generators {
        push(&mut basis, &mut queue, g)?;
    }

    let mut head = 0;
    while head < queue.len() {
        let w = queue[head].clone();
        head += 1;
        for g in generators {
            push(&mut basis, &mut queue, &(g * &w))?;
            push(&mut basis, &mut queue, &(&w * g))?;
        }
        push(&mut basis, &mut queue, &w.adjoint())?;
    }

    Ok(AlgebraBasis { basis })
}

/// Hermitian orthonormal basis of the commutant of {A, A*}.
///
/// Any matrix commuting with the dual idempotents is block-diagonal with
/// respect to the distance cells, so the unknowns are restricted to the cell
/// blocks before imposing commutation with A; the nullspace comes from the
/// spectrum of the normal matrix.
pub fn commutant(
    adjacency: &CMat,
    dual: &DualData,
    tol: f64,
) -> Result<Vec<CMat>, TModuleError> {
    let n = adjacency.nrows();

    // unknown index layout: consecutive over cells, row-major inside a block
    let mut positions: Vec<(usize, usize)> = Vec::new();
    for cell in &dual.cells {
        for &r in cell {
            for &s in cell {
                positions.push((r, s));
            }
        }
    }
    let unknowns = positions.len();

    // [M, A]_{x,y} = Σ_s M_{x,s} A_{s,y} - Σ_r A_{x,r} M_{r,y}
    let mut l = CMat::zeros(n * n, unknowns);
    for (col, &(r, s)) in positions.iter().enumerate() {
        for y in 0..n {
            let coef = adjacency[(s, y)];
            if coef != linalg::ZERO {
                l[(r * n + y, col)] += coef;
            }
        }
        for x in 0..n {
            let coef = adjacency[(x, r)];
            if coef != linalg::ZERO {
                l[(x * n + s, col)] -= coef;
            }
        }
    }

    let kernel = linalg::nullspace(&l, 1e-12);
    let mut raw: Vec<CMat> = kernel
        .iter()
        .map(|z| {
            let mut m = CMat::zeros(n, n);
            for (col, &(r, s)) in positions.iter().enumerate() {
                m[(r, s)] = z[col];
            }
            m
        })
        .collect();

    // Hermitian re-basis: the commutant is closed under conjugate-transpose,
    // so {M + M†, i(M - M†)} spans it with Hermitian elements.
    let dim = raw.len();
    let mut basis: Vec<CMat> = Vec::new();
    for m in raw.drain(..) {
        let herm = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
        let skew = (&m - m.adjoint()) * Complex::new(0.0, 0.5);
        for cand in [herm, skew] {
            if let Some(next) = linalg::orthonormal_complement(&basis, &cand, GS_TOL) {
                // Gram-Schmidt against Hermitian elements has real
                // coefficients, so re-symmetrizing only removes roundoff.
                let fixed = (&next + next.adjoint()) * Complex::new(0.5, 0.0);
                let norm = linalg::fro_norm(&fixed);
                basis.push(fixed / Complex::new(norm, 0.0));
            }
        }
    }
    if basis.len() != dim {
        return Err(TModuleError::CommutantDefect(basis.len() as f64 - dim as f64));
    }

    // certify commutation with both generators
    let scale = 1.0 + linalg::fro_norm(adjacency) + linalg::fro_norm(&dual.dual_adjacency);
    let mut worst: f64 = 0.0;
    for m in &basis {
        worst = worst.max(linalg::fro_norm(&linalg::commutator(m, adjacency)));
        worst = worst.max(linalg::fro_norm(&linalg::commutator(m, &dual.dual_adjacency)));
    }
    if worst > tol * scale * n as f64 {
        return Err(TModuleError::CommutantDefect(worst));
    }

    Ok(basis)
}

/// An irreducible submodule of the standard module, with its support profile.
#[derive(Debug, Clone)]
pub struct IrreducibleModule {
    /// Orthonormal basis, one column per dimension.
    pub basis: CMat,
    /// Endpoint ρ: first distance cell met by the module.
    pub endpoint: usize,
    /// Dual endpoint τ: first (reordered) eigenspace met by the module.
    pub dual_endpoint: usize,
    /// Diameter d: the dual-idempotent support is [ρ, ρ+d].
    pub diameter: usize,
    /// Dual diameter d*: the idempotent support is [τ, τ+d*].
    pub dual_diameter: usize,
    pub thin: bool,
    /// Isomorphism-type index, filled by `classify_types`.
    pub type_id: Option<usize>,
}

impl IrreducibleModule {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleProfile {
    pub endpoint: usize,
    pub dual_endpoint: usize,
    pub diameter: usize,
    pub dual_diameter: usize,
    pub thin: bool,
}

fn eps_rank(n: usize) -> f64 {
    1e-7 * (n as f64).sqrt()
}

/// Determines endpoint, dual endpoint, diameter, and thinness of a module
/// from the ranks of its projections onto the dual cells and the (reordered)
/// eigenspaces.
pub fn profile_module(
    basis: &CMat,
    ordered_idempotents: &[CMat],
    dual: &DualData,
    _tol: f64,
) -> Result<ModuleProfile, TModuleError> {
    let n = basis.nrows();
    let threshold = eps_rank(n);

    let support = |projectors: &[CMat], side: &'static str| -> Result<(usize, usize, bool), TModuleError> {
        let ranks: Vec<usize> = projectors
            .iter()
            .map(|p| linalg::rank_with_threshold(&(p * basis), threshold))
            .collect();
        let first = ranks.iter().position(|&r| r > 0);
        let last = ranks.iter().rposition(|&r| r > 0);
        let (first, last) = match (first, last) {
            (Some(f), Some(l)) => (f, l),
            _ => {
                return Err(TModuleError::NonContiguousSupport {
                    side,
                    ranks,
                })
            }
        };
        if ranks[first..=last].contains(&0) {
            return Err(TModuleError::NonContiguousSupport { side, ranks });
        }
        let thin = ranks.iter().all(|&r| r <= 1);
        Ok((first, last - first, thin))
    };

    let (endpoint, diameter, thin_dual) = support(&dual.dual_idempotents, "dual")?;
    let (dual_endpoint, dual_diameter, thin_primal) = support(ordered_idempotents, "primal")?;
    if diameter != dual_diameter {
        return Err(TModuleError::DiameterMismatch {
            d: diameter,
            d_star: dual_diameter,
        });
    }

    Ok(ModuleProfile {
        endpoint,
        dual_endpoint,
        diameter,
        dual_diameter,
        thin: thin_dual && thin_primal,
    })
}

/// Splits the standard module into irreducible T-modules.
///
/// A random Hermitian element of the commutant acts as a scalar on every
/// irreducible submodule, so for generic coefficients its eigenspaces are
/// exactly the irreducible summands.  Each candidate eigenspace is certified
/// invariant under A and A* and irreducible (the T-orbit of a random vector
/// fills it); on any failure a fresh element is drawn, up to five attempts.
pub fn decompose_modules(
    adjacency: &CMat,
    dual: &DualData,
    ordered_idempotents: &[CMat],
    commutant_basis: &[CMat],
    seed: u64,
    tol: f64,
) -> Result<Vec<IrreducibleModule>, TModuleError> {
    let n = adjacency.nrows();
    let a_star = &dual.dual_adjacency;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const ATTEMPTS: usize = 5;
    let mut last_reason = String::new();

    'attempt: for _ in 0..ATTEMPTS {
        // symmetrized complex-Gaussian combination of the commutant basis
        let mut h = CMat::zeros(n, n);
        for b in commutant_basis {
            let z = Complex::new(
                linalg::gaussian_cvec(&mut rng, 1)[0].re,
                linalg::gaussian_cvec(&mut rng, 1)[0].re,
            );
            h += b * z;
        }
        let h = (&h + h.adjoint()) * Complex::new(0.5, 0.0);

        let (values, vectors) = linalg::hermitian_eigen(&h);
        let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let clusters = linalg::cluster_sorted(&values, 1e-7 * (1.0 + top));

        let mut modules = Vec::with_capacity(clusters.len());
        for range in clusters {
            let dim = range.len();
            let mut basis = CMat::zeros(n, dim);
            for (dst, src) in range.clone().enumerate() {
                basis.set_column(dst, &vectors.column(src));
            }

            // invariance under both generators
            let project_out = |m: &CMat| -> f64 {
                let image = m * &basis;
                let inside = &basis * (basis.adjoint() * &image);
                linalg::fro_norm(&(image - inside))
            };
            let scale = 1.0 + linalg::fro_norm(adjacency) + linalg::fro_norm(a_star);
            let invariance = project_out(adjacency).max(project_out(a_star));
            if invariance > tol * scale * n as f64 {
                last_reason = format!("eigenspace not invariant (defect {invariance:.3e})");
                continue 'attempt;
            }

            // irreducibility: the orbit of a random vector spans the space
            let coeffs = linalg::gaussian_cvec(&mut rng, dim);
            let seed_vec = &basis * coeffs;
            let seed_vec = &seed_vec / Complex::new(seed_vec.norm(), 0.0);
            let mut orbit: Vec<CVec> = vec![seed_vec.clone()];
            let mut head = 0;
            while head < orbit.len() {
                let v = orbit[head].clone();
                head += 1;
                for m in [adjacency, a_star] {
                    let mut image = m * &v;
                    // keep the orbit inside the eigenspace to avoid drift
                    image = &basis * (basis.adjoint() * image);
                    if let Some(next) = linalg::orthonormal_complement_vec(&orbit, &image, 1e-8) {
                        orbit.push(next);
                    }
                }
            }
            if orbit.len() != dim {
                last_reason = format!(
                    "eigenspace of dimension {dim} has a proper orbit of dimension {}",
                    orbit.len()
                );
                continue 'attempt;
            }

            let profile = match profile_module(&basis, ordered_idempotents, dual, tol) {
                Ok(p) => p,
                Err(e) => {
                    last_reason = format!("profile failed: {e}");
                    continue 'attempt;
                }
            };
            modules.push(IrreducibleModule {
                basis,
                endpoint: profile.endpoint,
                dual_endpoint: profile.dual_endpoint,
                diameter: profile.diameter,
                dual_diameter: profile.dual_diameter,
                thin: profile.thin,
                type_id: None,
            });
        }

        let total: usize = modules.iter().map(|m| m.dim()).sum();
        if total != n {
            last_reason = format!("module dimensions sum to {total}, expected {n}");
            continue 'attempt;
        }

        modules.sort_by_key(|m| (m.endpoint, m.dual_endpoint, m.diameter));
        return Ok(modules);
    }

    Err(TModuleError::IrreducibilityFailure {
        attempts: ATTEMPTS,
        reason: last_reason,
    })
}

/// An isomorphism type of irreducible modules.
#[derive(Debug, Clone)]
pub struct TypeData {
    pub type_id: usize,
    pub endpoint: usize,
    pub dual_endpoint: usize,
    pub diameter: usize,
    pub multiplicity: usize,
    /// Index (into the module list) of the representative member.
    pub representative: usize,
    pub members: Vec<usize>,
    /// Orthogonal projector onto the span of the members.
    pub projector: CMat,
    /// Dimension of the full homogeneous component.
    pub dimension: usize,
}

/// Groups modules into isomorphism types by (ρ, τ, d) and parameter-array
/// equality, builds the homogeneous projectors e_ψ, and certifies they are
/// central.  `arrays[k]` is the flattened parameter array of module k.
pub fn classify_types(
    modules: &mut [IrreducibleModule],
    arrays: &[Vec<C64>],
    adjacency: &CMat,
    dual_adjacency: &CMat,
    tol: f64,
) -> Result<Vec<TypeData>, TModuleError> {
    assert_eq!(modules.len(), arrays.len());
    if let Some(k) = modules.iter().position(|m| !m.thin) {
        return Err(TModuleError::NonThinModule(k));
    }

    let arrays_close = |x: &Vec<C64>, y: &Vec<C64>| -> bool {
        x.len() == y.len() && {
            let scale = 1.0
                + x.iter()
                    .chain(y.iter())
                    .fold(0.0f64, |m, z| m.max(z.norm()));
            x.iter()
                .zip(y)
                .all(|(p, q)| (p - q).norm() <= 1e-6 * scale)
        }
    };

    // first-match grouping on (profile, parameter array)
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new(); // (representative, members)
    for k in 0..modules.len() {
        let key = (modules[k].endpoint, modules[k].dual_endpoint, modules[k].diameter);
        let mut placed = false;
        for (rep, members) in groups.iter_mut() {
            let rep_key = (
                modules[*rep].endpoint,
                modules[*rep].dual_endpoint,
                modules[*rep].diameter,
            );
            if rep_key == key && arrays_close(&arrays[*rep], &arrays[k]) {
                members.push(k);
                placed = true;
                break;
            }
        }
        if !placed {
            groups.push((k, vec![k]));
        }
    }

    // arrays equal across distinct profiles would make the grouping ambiguous
    for p in 0..groups.len() {
        for r in p + 1..groups.len() {
            let (a, b) = (groups[p].0, groups[r].0);
            let key_a = (modules[a].endpoint, modules[a].dual_endpoint, modules[a].diameter);
            let key_b = (modules[b].endpoint, modules[b].dual_endpoint, modules[b].diameter);
            if key_a != key_b && arrays_close(&arrays[a], &arrays[b]) {
                return Err(TModuleError::AmbiguousGrouping { a, b });
            }
        }
    }

    groups.sort_by_key(|(rep, _)| {
        (
            modules[*rep].endpoint,
            modules[*rep].dual_endpoint,
            modules[*rep].diameter,
        )
    });

    let n = adjacency.nrows();
    let scale = 1.0 + linalg::fro_norm(adjacency) + linalg::fro_norm(dual_adjacency);
    let mut types = Vec::with_capacity(groups.len());
    for (type_id, (rep, members)) in groups.into_iter().enumerate() {
        let mut projector = CMat::zeros(n, n);
        let mut dimension = 0;
        for &k in &members {
            projector += &modules[k].basis * modules[k].basis.adjoint();
            dimension += modules[k].dim();
            modules[k].type_id = Some(type_id);
        }
        let defect = linalg::fro_norm(&linalg::commutator(&projector, adjacency))
            .max(linalg::fro_norm(&linalg::commutator(&projector, dual_adjacency)));
        if defect > tol * scale * n as f64 {
            return Err(TModuleError::ProjectorNotCentral { type_id, defect });
        }
        types.push(TypeData {
            type_id,
            endpoint: modules[rep].endpoint,
            dual_endpoint: modules[rep].dual_endpoint,
            diameter: modules[rep].diameter,
            multiplicity: members.len(),
            representative: rep,
            members,
            projector,
            dimension,
        });
    }

    Ok(types)
}
