//! Bose-Mesner spectral decomposition, Krein parameters, and the exhaustive
//! search for Q-polynomial orderings.
//!
//! A distance-regular graph of diameter D has exactly D+1 distinct adjacency
//! eigenvalues.  The primitive idempotents are assembled from clustered
//! eigenspaces of the (real symmetric) adjacency matrix and every structural
//! identity is re-verified numerically rather than assumed.

use crate::graph::{DistanceRegularData, Graph};
use crate::linalg::{self, CMat};
use itertools::Itertools;
use nalgebra::Complex;
use thiserror::Error;

/// Largest diameter for which the factorial ordering search is allowed.
pub const MAX_ORDERING_DIAMETER: usize = 12;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("expected {expected} distinct eigenvalues, found {found}")]
    EigenvalueCount { expected: usize, found: usize },
    #[error("leading eigenvalue {found} does not match the valency {valency}")]
    LeadingEigenvalue { found: f64, valency: usize },
    #[error("leading idempotent deviates from J/n by {0:.3e}")]
    PerronDefect(f64),
    #[error("idempotent identities violated (defect {0:.3e})")]
    IdempotentDefect(f64),
    #[error("E_{i} ∘ E_{j} leaves the span of the idempotents (residual {residual:.3e})")]
    KreinExpansion { i: usize, j: usize, residual: f64 },
    #[error("Krein parameter q^{h}_({i},{j}) = {value:.6e} is negative beyond tolerance")]
    NegativeKrein {
        h: usize,
        i: usize,
        j: usize,
        value: f64,
    },
    #[error("ordering search supports diameter up to {MAX_ORDERING_DIAMETER}, got {0}")]
    DiameterTooLarge(usize),
}

/// Eigenvalues (descending), multiplicities, and primitive idempotents of
/// the adjacency matrix.  `E_0 = J/n` sits at index 0.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub idempotents: Vec<CMat>,
}

impl SpectralData {
    pub fn diameter(&self) -> usize {
        self.eigenvalues.len() - 1
    }
}

/// Krein parameters `q[h][i][j]` defined by
/// `E_i ∘ E_j = (1/n) Σ_h q^h_ij E_h` (entrywise product on the left).
#[derive(Debug, Clone)]
pub struct KreinTensor {
    pub n: usize,
    pub values: Vec<Vec<Vec<f64>>>,
    /// Most negative entry encountered (diagnostic; certified >= -ε_zero).
    pub min_value: f64,
    /// Worst residual of the entrywise products against the idempotent span.
    pub expansion_residual: f64,
}

/// A Q-polynomial ordering, stored as the permutation applied to the
/// nontrivial idempotents: the reordered sequence is `E_0, E_{perm[0]}, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPolyOrdering {
    pub perm: Vec<usize>,
}

impl QPolyOrdering {
    /// Full index map including the fixed 0th position.
    pub fn full(&self) -> Vec<usize> {
        std::iter::once(0).chain(self.perm.iter().copied()).collect()
    }
}

fn cluster_tolerance(eigenvalues: &[f64]) -> f64 {
    let max_abs = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1e-7 * (1.0 + max_abs)
}

/// Zero test scale for Krein entries.
pub fn eps_zero(n: usize) -> f64 {
    1e-9 * n as f64
}

/// Diagonalizes the adjacency matrix and clusters the spectrum into exactly
/// D+1 eigenspaces, returning eigenvalues in descending order with their
/// spectral projectors.
pub fn spectral_decomposition(
    graph: &Graph,
    data: &DistanceRegularData,
    tol: f64,
) -> Result<SpectralData, SpectralError> {
    let n = graph.n();
    let a = linalg::from_int(graph.adjacency());
    let (raw_values, vectors) = linalg::hermitian_eigen(&a);
    let clusters = linalg::cluster_sorted(&raw_values, cluster_tolerance(&raw_values));
    let expected = data.diameter + 1;
    if clusters.len() != expected {
        return Err(SpectralError::EigenvalueCount {
            expected,
            found: clusters.len(),
        });
    }

    // ascending clusters -> descending eigenvalue order
    let mut eigenvalues = Vec::with_capacity(expected);
    let mut multiplicities = Vec::with_capacity(expected);
    let mut idempotents = Vec::with_capacity(expected);
    for range in clusters.iter().rev() {
        let cols = range.clone().collect::<Vec<_>>();
        let mean = cols.iter().map(|&k| raw_values[k]).sum::<f64>() / cols.len() as f64;
        let mut proj = CMat::zeros(n, n);
        for &k in &cols {
            let v = vectors.column(k);
            proj += v * v.adjoint();
        }
        eigenvalues.push(mean);
        multiplicities.push(cols.len());
        idempotents.push(proj);
    }

    let valency = data.valency;
    if (eigenvalues[0] - valency as f64).abs() > cluster_tolerance(&eigenvalues) {
        return Err(SpectralError::LeadingEigenvalue {
            found: eigenvalues[0],
            valency,
        });
    }

    let scale = 1.0 + valency as f64;
    let perron = CMat::from_element(n, n, Complex::new(1.0 / n as f64, 0.0));
    let perron_defect = linalg::fro_norm(&(&idempotents[0] - &perron));
    if perron_defect > tol * scale * n as f64 {
        return Err(SpectralError::PerronDefect(perron_defect));
    }

    // Resolution of identity and mutual orthogonality.
    let mut defect: f64 = 0.0;
    let mut sum = CMat::zeros(n, n);
    for (i, e) in idempotents.iter().enumerate() {
        sum += e;
        for (j, f) in idempotents.iter().enumerate() {
            let prod = e * f;
            let target = if i == j { e.clone() } else { CMat::zeros(n, n) };
            defect = defect.max(linalg::fro_norm(&(prod - target)));
        }
    }
    defect = defect.max(linalg::fro_norm(&(sum - linalg::identity(n))));
    // A = Σ θ_i E_i
    let mut rebuilt = CMat::zeros(n, n);
    for (theta, e) in eigenvalues.iter().zip(&idempotents) {
        rebuilt += e * Complex::new(*theta, 0.0);
    }
    defect = defect.max(linalg::fro_norm(&(rebuilt - &a)) / scale);
    if defect > tol * (n as f64) {
        return Err(SpectralError::IdempotentDefect(defect));
    }

    Ok(SpectralData {
        n,
        eigenvalues,
        multiplicities,
        idempotents,
    })
}

/// Expands every entrywise product `E_i ∘ E_j` in the idempotent basis and
/// certifies that the expansion is exact and the coefficients nonnegative.
pub fn krein_parameters(spec: &SpectralData, tol: f64) -> Result<KreinTensor, SpectralError> {
    let n = spec.n;
    let dd = spec.eigenvalues.len();
    let nf = n as f64;
    let mut values = vec![vec![vec![0.0; dd]; dd]; dd];
    let mut min_value = f64::INFINITY;
    let mut worst_residual: f64 = 0.0;

    for i in 0..dd {
        for j in i..dd {
            let prod = linalg::hadamard(&spec.idempotents[i], &spec.idempotents[j]);
            let mut remainder = prod.clone();
            for h in 0..dd {
                // q^h_ij = n * <E_h, E_i∘E_j> / m_h  (E_h is an orthogonal
                // projector, so <E_h, E_h> = m_h).
                let coef = linalg::fro_inner(&spec.idempotents[h], &prod) * nf
                    / Complex::new(spec.multiplicities[h] as f64, 0.0);
                values[h][i][j] = coef.re;
                values[h][j][i] = coef.re;
                min_value = min_value.min(coef.re);
                remainder -= &spec.idempotents[h] * (coef / nf);
            }
            let residual = linalg::fro_norm(&remainder);
            worst_residual = worst_residual.max(residual);
            if residual > tol * nf {
                return Err(SpectralError::KreinExpansion { i, j, residual });
            }
        }
    }

    let cutoff = -eps_zero(n);
    for h in 0..dd {
        for i in 0..dd {
            for j in 0..dd {
                if values[h][i][j] < cutoff {
                    return Err(SpectralError::NegativeKrein {
                        h,
                        i,
                        j,
                        value: values[h][i][j],
                    });
                }
            }
        }
    }

    Ok(KreinTensor {
        n,
        values,
        min_value,
        expansion_residual: worst_residual,
    })
}

/// Exhaustive search for Q-polynomial orderings of the nontrivial
/// idempotents.  A permutation qualifies when the reindexed `q^1_ij` vanishes
/// for |i-j| > 1 and is nonzero for |i-j| = 1.  Permutations are tried in
/// lexicographic order, so the returned list is deterministic; an empty list
/// is a legitimate outcome.
pub fn find_qpoly_orderings(krein: &KreinTensor) -> Result<Vec<QPolyOrdering>, SpectralError> {
    let dd = krein.values.len();
    let d = dd - 1;
    if d > MAX_ORDERING_DIAMETER {
        return Err(SpectralError::DiameterTooLarge(d));
    }
    let eps = eps_zero(krein.n);
    let mut found = Vec::new();
    for perm in (1..dd).permutations(d) {
        let full: Vec<usize> = std::iter::once(0).chain(perm.iter().copied()).collect();
        let one = full[1];
        let qualifies = (0..dd).all(|i| {
            (0..dd).all(|j| {
                let v = krein.values[one][full[i]][full[j]].abs();
                match i.abs_diff(j) {
                    0 => true,
                    1 => v > eps,
                    _ => v <= eps,
                }
            })
        });
        if qualifies {
            found.push(QPolyOrdering { perm });
        }
    }
    Ok(found)
}

/// Eigenvalue sequence reordered by a Q-polynomial ordering.
pub fn ordered_eigenvalues(spec: &SpectralData, ordering: &QPolyOrdering) -> Vec<f64> {
    ordering
        .full()
        .iter()
        .map(|&k| spec.eigenvalues[k])
        .collect()
}
