//! Global Askey-Wilson structure on the standard module.
//!
//! The homogeneous projectors e_ψ (one per isomorphism type of irreducible
//! module) carry the per-type scalars into central matrices 𝐚, 𝐛, 𝐜, Λ.
//! Together with the normalized generators these determine a third generator
//! 𝐂 through one of three cyclic relations; the other two relations,
//! centrality of all three left-hand sides, and membership of 𝐂 in the
//! subconstituent algebra are then certified numerically, never assumed.

use crate::linalg::{self, CMat, C64};
use crate::tmodule::{AlgebraBasis, IrreducibleModule, TypeData};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AwError {
    #[error("central element {element} fails inversion (defect {defect:.3e})")]
    InverseDefect { element: &'static str, defect: f64 },
    #[error("central element {element} fails to commute with the generators (defect {defect:.3e})")]
    CentralityDefect { element: &'static str, defect: f64 },
}

/// Scalars attached to one isomorphism type, read off its Leonard system.
#[derive(Debug, Clone, Copy)]
pub struct TypeScalars {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub diameter: usize,
}

/// The central matrices 𝐚, 𝐛, 𝐜, Λ and their inverses, each a combination
/// Σ_ψ scalar(ψ)·e_ψ of the homogeneous projectors.
#[derive(Debug, Clone)]
pub struct CentralElements {
    pub a: CMat,
    pub a_inv: CMat,
    pub b: CMat,
    pub b_inv: CMat,
    pub c: CMat,
    pub c_inv: CMat,
    pub lambda: CMat,
    pub lambda_inv: CMat,
}

/// Assembles the central elements from the per-type scalars and certifies
/// that each one is invertible by the reciprocal combination and commutes
/// with both generators.
// negated comparisons are deliberate: NaN (from inverting a zero scalar)
// must land in the error branch
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn central_elements(
    types: &[TypeData],
    scalars: &[TypeScalars],
    q: C64,
    gen_a: &CMat,
    gen_b: &CMat,
    tol: f64,
) -> Result<CentralElements, AwError> {
    assert_eq!(types.len(), scalars.len());
    let n = gen_a.nrows();

    let combine = |f: &dyn Fn(&TypeScalars) -> C64| -> CMat {
        types
            .iter()
            .zip(scalars)
            .fold(CMat::zeros(n, n), |acc, (t, s)| acc + &t.projector * f(s))
    };

    let lam = |s: &TypeScalars| q.powi(s.diameter as i32 + 1);
    let elements = CentralElements {
        a: combine(&|s| s.a),
        a_inv: combine(&|s| s.a.inv()),
        b: combine(&|s| s.b),
        b_inv: combine(&|s| s.b.inv()),
        c: combine(&|s| s.c),
        c_inv: combine(&|s| s.c.inv()),
        lambda: combine(&lam),
        lambda_inv: combine(&|s| lam(s).inv()),
    };

    let id = linalg::identity(n);
    let named: [(&'static str, &CMat, &CMat); 4] = [
        ("a", &elements.a, &elements.a_inv),
        ("b", &elements.b, &elements.b_inv),
        ("c", &elements.c, &elements.c_inv),
        ("lambda", &elements.lambda, &elements.lambda_inv),
    ];
    let gen_scale = 1.0 + linalg::fro_norm(gen_a) + linalg::fro_norm(gen_b);
    for (element, m, m_inv) in named {
        // negated comparisons so that NaN (from inverting a zero scalar)
        // also lands in the error branch
        let central = linalg::fro_norm(&linalg::commutator(m, gen_a))
            .max(linalg::fro_norm(&linalg::commutator(m, gen_b)));
        if !(central <= tol * (1.0 + linalg::fro_norm(m)) * gen_scale * n as f64) {
            return Err(AwError::CentralityDefect {
                element,
                defect: central,
            });
        }
        let scale = 1.0 + linalg::fro_norm(m) * linalg::fro_norm(m_inv);
        let defect = linalg::fro_norm(&(m * m_inv - &id));
        if !(defect <= tol * scale * n as f64) {
            return Err(AwError::InverseDefect { element, defect });
        }
    }

    Ok(elements)
}

/// A raw Frobenius residual together with its relative form, normalized by
/// one plus the Frobenius norms of the quantities being compared.
#[derive(Debug, Clone, Copy)]
pub struct Residual {
    pub raw: f64,
    pub rel: f64,
}

impl Residual {
    fn new(raw: f64, scale: f64) -> Self {
        Residual {
            raw,
            rel: raw / scale,
        }
    }
}

/// Certificate for the global Askey-Wilson structure: the third generator,
/// the three relation residuals, the three centrality residuals, and the
/// algebra-membership residual of 𝐂.
#[derive(Debug, Clone)]
pub struct AwCertificate {
    pub c_matrix: CMat,
    /// Residuals of the three cyclic relations.  The third relation defines
    /// 𝐂, so its residual measures only the assembly arithmetic.
    pub relations: [Residual; 3],
    /// Commutation defects of the three central expressions against both
    /// generators.
    pub central: [Residual; 3],
    /// Distance from 𝐂 to the span of the subconstituent algebra basis.
    pub membership: Residual,
}

impl AwCertificate {
    /// Worst relative residual across every certified quantity.
    pub fn worst_rel(&self) -> f64 {
        self.relations
            .iter()
            .chain(&self.central)
            .chain(std::iter::once(&self.membership))
            .fold(0.0f64, |m, r| m.max(r.rel))
    }
}

/// Builds 𝐂 from the third cyclic relation and certifies the full structure.
///
/// The three relations, with Z = (Λ + Λ⁻¹)/(q + q⁻¹) and s(x) = x + x⁻¹:
///
///   𝐀 + (q𝐁𝐂 - q⁻¹𝐂𝐁)/(q² - q⁻²) = s(𝐚)Z + s(𝐛)s(𝐜)/(q + q⁻¹)
///   𝐁 + (q𝐂𝐀 - q⁻¹𝐀𝐂)/(q² - q⁻²) = s(𝐛)Z + s(𝐜)s(𝐚)/(q + q⁻¹)
///   𝐂 + (q𝐀𝐁 - q⁻¹𝐁𝐀)/(q² - q⁻²) = s(𝐜)Z + s(𝐚)s(𝐛)/(q + q⁻¹)
pub fn certify_relations(
    gen_a: &CMat,
    gen_b: &CMat,
    elements: &CentralElements,
    q: C64,
    algebra: &AlgebraBasis,
) -> AwCertificate {
    let denom = q * q - (q * q).inv();
    let twist = |x: &CMat, y: &CMat| (x * y * q - y * x * q.inv()) / denom;

    let sa = &elements.a + &elements.a_inv;
    let sb = &elements.b + &elements.b_inv;
    let sc = &elements.c + &elements.c_inv;
    let sl = &elements.lambda + &elements.lambda_inv;
    let den = q + q.inv();
    let rhs = |first: &CMat, second: &CMat, third: &CMat| (first * &sl + second * third) / den;

    let rhs3 = rhs(&sc, &sa, &sb);
    let c_matrix = &rhs3 - twist(gen_a, gen_b);

    let lhs = [
        gen_a + twist(gen_b, &c_matrix),
        gen_b + twist(&c_matrix, gen_a),
        &c_matrix + twist(gen_a, gen_b),
    ];
    let rhs_all = [rhs(&sa, &sb, &sc), rhs(&sb, &sc, &sa), rhs3];

    let relations = std::array::from_fn(|i| {
        let raw = linalg::fro_norm(&(&lhs[i] - &rhs_all[i]));
        Residual::new(
            raw,
            1.0 + linalg::fro_norm(&lhs[i]) + linalg::fro_norm(&rhs_all[i]),
        )
    });

    let gen_scale = linalg::fro_norm(gen_a) + linalg::fro_norm(gen_b);
    let central = std::array::from_fn(|i| {
        let raw = linalg::fro_norm(&linalg::commutator(&lhs[i], gen_a))
            .max(linalg::fro_norm(&linalg::commutator(&lhs[i], gen_b)));
        Residual::new(raw, 1.0 + linalg::fro_norm(&lhs[i]) + gen_scale)
    });

    let membership = Residual::new(
        algebra.projection_residual(&c_matrix),
        1.0 + linalg::fro_norm(&c_matrix),
    );

    AwCertificate {
        c_matrix,
        relations,
        central,
        membership,
    }
}

/// Frobenius distance between the compression of 𝐂 onto a module and the
/// third generator computed intrinsically on that module.  The two are built
/// by different routes (global central elements vs. the module's own Leonard
/// parameters), so agreement is a genuine consistency check.
pub fn compression_defect(c_matrix: &CMat, module: &IrreducibleModule, a_epsilon: &CMat) -> f64 {
    let compressed = module.basis.adjoint() * c_matrix * &module.basis;
    linalg::fro_norm(&(compressed - a_epsilon))
}
