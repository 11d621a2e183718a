//! Serializable analysis reports.
//!
//! The JSON layout is a stable contract: field names and nesting are fixed,
//! complex scalars appear as `{re, im}` objects, residuals as `{raw, rel}`.
//! Every floating-point value is quantized to 12 significant digits with a
//! zero floor of 1e-10 before serialization, so reports are byte-identical
//! across runs and across decomposition seeds (basis-dependent quantities
//! are excluded from the report entirely).

use crate::awalgebra::{AwCertificate, Residual, TypeScalars};
use crate::linalg::C64;
use crate::qracah::QRacahFit;
use crate::tmodule::TypeData;
use serde::Serialize;

/// Rounds to 12 significant digits, flushing |x| < 1e-10 (including -0) to
/// exact zero.
pub fn quantize(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x.abs() < 1e-10 {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("round-trip float")
}

/// A complex scalar in report form.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CxRepr {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for CxRepr {
    fn from(z: C64) -> Self {
        CxRepr {
            re: quantize(z.re),
            im: quantize(z.im),
        }
    }
}

/// A raw/relative residual pair in report form.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualRepr {
    pub raw: f64,
    pub rel: f64,
}

impl From<Residual> for ResidualRepr {
    fn from(r: Residual) -> Self {
        ResidualRepr {
            raw: quantize(r.raw),
            rel: quantize(r.rel),
        }
    }
}

/// One isomorphism type of irreducible modules.  The scalar fields are
/// `null` when the pipeline stopped before the Leonard stage (non-thin
/// modules have no q-Racah Leonard system).
#[derive(Debug, Clone, Serialize)]
pub struct TypeReport {
    pub psi: usize,
    pub rho: usize,
    pub tau: usize,
    pub d: usize,
    pub multiplicity: usize,
    #[serde(rename = "aW")]
    pub a_w: Option<CxRepr>,
    #[serde(rename = "bW")]
    pub b_w: Option<CxRepr>,
    pub c: Option<CxRepr>,
    pub kappa: Option<CxRepr>,
}

impl TypeReport {
    pub fn new(t: &TypeData, scalars: &TypeScalars, kappa: C64) -> Self {
        TypeReport {
            psi: t.type_id,
            rho: t.endpoint,
            tau: t.dual_endpoint,
            d: t.diameter,
            multiplicity: t.multiplicity,
            a_w: Some(scalars.a.into()),
            b_w: Some(scalars.b.into()),
            c: Some(scalars.c.into()),
            kappa: Some(kappa.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DimsReport {
    #[serde(rename = "T")]
    pub t: usize,
    pub commutant: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualsReport {
    pub awdrg1: ResidualRepr,
    pub awdrg2: ResidualRepr,
    pub awdrg3: ResidualRepr,
    pub central1: ResidualRepr,
    pub central2: ResidualRepr,
    pub central3: ResidualRepr,
    pub membership: ResidualRepr,
}

impl From<&AwCertificate> for ResidualsReport {
    fn from(cert: &AwCertificate) -> Self {
        ResidualsReport {
            awdrg1: cert.relations[0].into(),
            awdrg2: cert.relations[1].into(),
            awdrg3: cert.relations[2].into(),
            central1: cert.central[0].into(),
            central2: cert.central[1].into(),
            central3: cert.central[2].into(),
            membership: cert.membership.into(),
        }
    }
}

/// The full analysis report for one (vertex, ordering, q-branch) attempt.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub graph: String,
    pub n: usize,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub vertex: usize,
    /// Idempotent indices in the Q-polynomial order used, starting with 0.
    pub ordering: Vec<usize>,
    pub q: CxRepr,
    pub w: CxRepr,
    pub u: CxRepr,
    pub v: CxRepr,
    pub wstar: CxRepr,
    pub ustar: CxRepr,
    pub vstar: CxRepr,
    pub a: CxRepr,
    pub b: CxRepr,
    pub types: Vec<TypeReport>,
    pub dims: Option<DimsReport>,
    pub residuals: Option<ResidualsReport>,
    pub thin: bool,
    pub status: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Copies the q-Racah scalars out of a fit.
    pub fn fit_fields(fit: &QRacahFit) -> [CxRepr; 9] {
        [
            fit.q.into(),
            fit.w.into(),
            fit.u.into(),
            fit.v.into(),
            fit.wstar.into(),
            fit.ustar.into(),
            fit.vstar.into(),
            fit.a.into(),
            fit.b.into(),
        ]
    }

    /// Human-readable rendering of the same data; JSON remains the contract.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let cx = |z: &CxRepr| format!("{:+.6} {:+.6}i", z.re, z.im);
        writeln!(s, "graph     : {} (n = {}, D = {})", self.graph, self.n, self.diameter).unwrap();
        writeln!(s, "vertex    : {}", self.vertex).unwrap();
        writeln!(s, "ordering  : {:?}", self.ordering).unwrap();
        writeln!(s, "status    : {}", self.status).unwrap();
        writeln!(s, "q         : {}", cx(&self.q)).unwrap();
        writeln!(
            s,
            "primal fit: w = {}, u = {}, v = {}",
            cx(&self.w),
            cx(&self.u),
            cx(&self.v)
        )
        .unwrap();
        writeln!(
            s,
            "dual fit  : w* = {}, u* = {}, v* = {}",
            cx(&self.wstar),
            cx(&self.ustar),
            cx(&self.vstar)
        )
        .unwrap();
        writeln!(s, "a, b      : {}, {}", cx(&self.a), cx(&self.b)).unwrap();
        writeln!(s, "thin      : {}", self.thin).unwrap();
        if let Some(dims) = &self.dims {
            writeln!(s, "dim T     : {}   dim commutant: {}", dims.t, dims.commutant).unwrap();
        }
        writeln!(s, "types     :").unwrap();
        for t in &self.types {
            let scalars = match (&t.a_w, &t.b_w, &t.c, &t.kappa) {
                (Some(aw), Some(bw), Some(c), Some(k)) => format!(
                    "a(W) = {}, b(W) = {}, c = {}, kappa = {}",
                    cx(aw),
                    cx(bw),
                    cx(c),
                    cx(k)
                ),
                _ => "scalars unavailable".to_string(),
            };
            writeln!(
                s,
                "  psi {}: rho = {}, tau = {}, d = {}, multiplicity = {}, {}",
                t.psi, t.rho, t.tau, t.d, t.multiplicity, scalars
            )
            .unwrap();
        }
        if let Some(r) = &self.residuals {
            writeln!(s, "residuals (raw / rel):").unwrap();
            for (name, v) in [
                ("awdrg1", &r.awdrg1),
                ("awdrg2", &r.awdrg2),
                ("awdrg3", &r.awdrg3),
                ("central1", &r.central1),
                ("central2", &r.central2),
                ("central3", &r.central3),
                ("membership", &r.membership),
            ] {
                writeln!(s, "  {name:<10}: {:.3e} / {:.3e}", v.raw, v.rel).unwrap();
            }
        }
        s
    }
}

/// Partial report for the `spectrum` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub graph: String,
    pub n: usize,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Smallest Krein parameter (certified ≥ -ε).
    pub krein_min: f64,
    pub orderings: Vec<Vec<usize>>,
}

impl SpectrumReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "graph        : {} (n = {}, D = {})", self.graph, self.n, self.diameter)
            .unwrap();
        writeln!(s, "eigenvalues  : {:?}", self.eigenvalues).unwrap();
        writeln!(s, "multiplicity : {:?}", self.multiplicities).unwrap();
        writeln!(s, "krein min    : {:.3e}", self.krein_min).unwrap();
        writeln!(s, "orderings    : {:?}", self.orderings).unwrap();
        s
    }
}

/// Partial report for the `qracah` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct QRacahReport {
    pub graph: String,
    pub n: usize,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub vertex: usize,
    pub ordering: Vec<usize>,
    pub q: CxRepr,
    pub w: CxRepr,
    pub u: CxRepr,
    pub v: CxRepr,
    pub wstar: CxRepr,
    pub ustar: CxRepr,
    pub vstar: CxRepr,
    pub a: CxRepr,
    pub b: CxRepr,
    pub residual: f64,
}

impl QRacahReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let cx = |z: &CxRepr| format!("{:+.6} {:+.6}i", z.re, z.im);
        let mut s = String::new();
        writeln!(s, "graph   : {} (n = {}, D = {})", self.graph, self.n, self.diameter).unwrap();
        writeln!(s, "vertex  : {}", self.vertex).unwrap();
        writeln!(s, "ordering: {:?}", self.ordering).unwrap();
        writeln!(s, "q       : {}", cx(&self.q)).unwrap();
        writeln!(s, "primal  : w = {}, u = {}, v = {}", cx(&self.w), cx(&self.u), cx(&self.v))
            .unwrap();
        writeln!(
            s,
            "dual    : w* = {}, u* = {}, v* = {}",
            cx(&self.wstar),
            cx(&self.ustar),
            cx(&self.vstar)
        )
        .unwrap();
        writeln!(s, "a, b    : {}, {}", cx(&self.a), cx(&self.b)).unwrap();
        writeln!(s, "residual: {:.3e}", self.residual).unwrap();
        s
    }
}

/// Partial report for the `modules` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct ModulesReport {
    pub graph: String,
    pub n: usize,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub vertex: usize,
    pub ordering: Vec<usize>,
    pub types: Vec<InventoryEntry>,
    pub dims: DimsReport,
    pub thin: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InventoryEntry {
    pub rho: usize,
    pub tau: usize,
    pub d: usize,
    pub multiplicity: usize,
    /// Total dimension of the homogeneous component (multiplicity · (d+1)
    /// when thin).
    pub dimension: usize,
}

impl ModulesReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "graph   : {} (n = {}, D = {})", self.graph, self.n, self.diameter).unwrap();
        writeln!(s, "vertex  : {}", self.vertex).unwrap();
        writeln!(s, "ordering: {:?}", self.ordering).unwrap();
        writeln!(s, "dim T   : {}   dim commutant: {}", self.dims.t, self.dims.commutant)
            .unwrap();
        writeln!(s, "thin    : {}", self.thin).unwrap();
        writeln!(s, "modules :").unwrap();
        for e in &self.types {
            writeln!(
                s,
                "  rho = {}, tau = {}, d = {}, multiplicity = {}, dimension = {}",
                e.rho, e.tau, e.d, e.multiplicity, e.dimension
            )
            .unwrap();
        }
        s
    }
}
