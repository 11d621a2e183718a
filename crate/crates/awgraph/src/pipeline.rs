//! End-to-end orchestration: graph → certification → report.
//!
//! The per-graph stages (distance data, spectrum, Krein parameters, ordering
//! search) run once; everything downstream runs per attempt, where an
//! attempt is one (vertex, ordering, q-branch) combination.  Failures carry
//! the exit code of the stage they died in, and a multi-attempt run that
//! never succeeds reports the code of the attempt that got furthest — stage
//! depth and exit code increase together:
//!
//!   2 not distance-regular · 3 no Q-polynomial ordering · 4 not q-Racah ·
//!   5 non-thin module · 6 certification residual
//!
//! (exit 1 is reserved for I/O and parse problems in the front end).

use crate::awalgebra::{central_elements, certify_relations, AwError, TypeScalars};
use crate::graph::{compute_distance_data, DistanceRegularData, Graph, GraphError};
use crate::leonard::{kappa_c, module_a_epsilon, restrict_leonard, LeonardError, RestrictedLeonard};
use crate::linalg::{self, CMat, C64};
use crate::qracah::{assemble_fit, fit_base_q, normalize_generators, QRacahError, QRacahFit};
use crate::report::{
    quantize, DimsReport, InventoryEntry, ModulesReport, QRacahReport, Report, ResidualsReport,
    SpectrumReport, TypeReport,
};
use crate::spectral::{
    find_qpoly_orderings, krein_parameters, ordered_eigenvalues, spectral_decomposition,
    KreinTensor, QPolyOrdering, SpectralData, SpectralError,
};
use crate::tmodule::{
    algebra_closure, build_dual_data, classify_types, commutant, decompose_modules, DualData,
    IrreducibleModule, TModuleError,
};

/// Tunable knobs shared by every pipeline entry point.
#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    /// Relative residual tolerance for every certification.
    pub tol: f64,
    /// Seed for the randomized module decomposition.
    pub seed: u64,
    /// Try every base candidate q instead of only the canonical branch.
    pub q_branch_all: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tol: 1e-8,
            seed: 0,
            q_branch_all: false,
        }
    }
}

/// A failed stage, with the process exit code it maps to.  Reports are
/// attached when the pipeline got far enough to assemble one (non-thin
/// modules, residuals over tolerance).
#[derive(Debug)]
pub struct StageFailure {
    pub exit_code: i32,
    pub stage: &'static str,
    pub message: String,
    pub report: Option<Box<Report>>,
}

impl std::fmt::Display for StageFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.stage, self.message)
    }
}

fn fail(exit_code: i32, stage: &'static str, message: impl ToString) -> StageFailure {
    StageFailure {
        exit_code,
        stage,
        message: message.to_string(),
        report: None,
    }
}

fn graph_failure(e: GraphError) -> StageFailure {
    match e {
        GraphError::NotRegular { .. } | GraphError::NotDistanceRegular { .. } => {
            fail(2, "distance-regularity", e)
        }
        other => fail(1, "input", other),
    }
}

fn spectral_failure(e: SpectralError) -> StageFailure {
    match e {
        SpectralError::DiameterTooLarge(_) => fail(3, "ordering-search", e),
        other => fail(6, "spectral", other),
    }
}

fn tmodule_failure(e: TModuleError) -> StageFailure {
    match e {
        TModuleError::DualEigenvalueCollision { .. } => fail(4, "dual-data", e),
        TModuleError::NonThinModule(_) => fail(5, "modules", e),
        other => fail(6, "modules", other),
    }
}

fn qracah_failure(e: QRacahError) -> StageFailure {
    fail(4, "q-racah", e)
}

fn leonard_failure(e: LeonardError) -> StageFailure {
    fail(6, "leonard", e)
}

fn aw_failure(e: AwError) -> StageFailure {
    fail(6, "relations", e)
}

/// Per-graph data shared by every attempt.
pub struct GraphAnalysis {
    pub data: DistanceRegularData,
    pub spec: SpectralData,
    pub krein: KreinTensor,
    pub orderings: Vec<QPolyOrdering>,
    pub adjacency: CMat,
}

/// Runs the vertex-independent stages once.
pub fn prepare(graph: &Graph, tol: f64) -> Result<GraphAnalysis, StageFailure> {
    let data = compute_distance_data(graph).map_err(graph_failure)?;
    let spec = spectral_decomposition(graph, &data, tol).map_err(spectral_failure)?;
    let krein = krein_parameters(&spec, tol).map_err(spectral_failure)?;
    let orderings = find_qpoly_orderings(&krein).map_err(spectral_failure)?;
    if orderings.is_empty() {
        return Err(fail(
            3,
            "ordering-search",
            "no Q-polynomial ordering of the primitive idempotents exists",
        ));
    }
    Ok(GraphAnalysis {
        data,
        spec,
        krein,
        orderings,
        adjacency: linalg::from_int(graph.adjacency()),
    })
}

/// One (vertex, ordering, q-branch) attempt.
pub struct Attempt {
    pub vertex: usize,
    pub ordering_index: usize,
    pub q_index: usize,
    pub outcome: Result<Report, StageFailure>,
}

/// Everything the full pipeline produced for one attempt, before thresholds.
struct AttemptData {
    fit: QRacahFit,
    ordering: Vec<usize>,
    types_report: Vec<TypeReport>,
    dims: DimsReport,
    residuals: ResidualsReport,
    worst_rel: f64,
    thin: bool,
}

fn build_report(
    graph: &Graph,
    analysis: &GraphAnalysis,
    vertex: usize,
    data: &AttemptData,
    status: &str,
) -> Report {
    let f = Report::fit_fields(&data.fit);
    Report {
        graph: graph.name().to_string(),
        n: graph.n(),
        diameter: analysis.data.diameter,
        vertex,
        ordering: data.ordering.clone(),
        q: f[0],
        w: f[1],
        u: f[2],
        v: f[3],
        wstar: f[4],
        ustar: f[5],
        vstar: f[6],
        a: f[7],
        b: f[8],
        types: data.types_report.clone(),
        dims: Some(data.dims),
        residuals: Some(data.residuals.clone()),
        thin: data.thin,
        status: status.to_string(),
    }
}

/// Report for a run whose modules were decomposed but found non-thin: the
/// inventory is known, the Leonard scalars are not.
fn nonthin_report(
    graph: &Graph,
    analysis: &GraphAnalysis,
    vertex: usize,
    fit: &QRacahFit,
    ordering: &[usize],
    modules: &[IrreducibleModule],
) -> Report {
    let f = Report::fit_fields(fit);
    let mut types: Vec<TypeReport> = Vec::new();
    for m in modules {
        if let Some(t) = types
            .iter_mut()
            .find(|t| (t.rho, t.tau, t.d) == (m.endpoint, m.dual_endpoint, m.diameter))
        {
            t.multiplicity += 1;
        } else {
            types.push(TypeReport {
                psi: types.len(),
                rho: m.endpoint,
                tau: m.dual_endpoint,
                d: m.diameter,
                multiplicity: 1,
                a_w: None,
                b_w: None,
                c: None,
                kappa: None,
            });
        }
    }
    Report {
        graph: graph.name().to_string(),
        n: graph.n(),
        diameter: analysis.data.diameter,
        vertex,
        ordering: ordering.to_vec(),
        q: f[0],
        w: f[1],
        u: f[2],
        v: f[3],
        wstar: f[4],
        ustar: f[5],
        vstar: f[6],
        a: f[7],
        b: f[8],
        types,
        dims: None,
        residuals: None,
        thin: false,
        status: "nonthin".to_string(),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_attempt(
    graph: &Graph,
    analysis: &GraphAnalysis,
    vertex: usize,
    ordering: &QPolyOrdering,
    dual: &DualData,
    theta: &[f64],
    q: C64,
    cfg: &PipelineConfig,
) -> Result<Report, StageFailure> {
    let tol = cfg.tol;
    let fit =
        assemble_fit(theta, &dual.dual_eigenvalues, q, tol).map_err(qracah_failure)?;

    let ordered_idempotents: Vec<CMat> = ordering
        .full()
        .iter()
        .map(|&k| analysis.spec.idempotents[k].clone())
        .collect();
    let gens = normalize_generators(
        &analysis.adjacency,
        &dual.dual_adjacency,
        &ordered_idempotents,
        &dual.dual_idempotents,
        &fit,
        tol,
    )
    .map_err(qracah_failure)?;

    let n = graph.n();
    let algebra = algebra_closure(&[gens.gen_a.clone(), gens.gen_b.clone()], n * n, tol)
        .map_err(tmodule_failure)?;
    let comm = commutant(&analysis.adjacency, dual, tol).map_err(tmodule_failure)?;
    let mut modules = decompose_modules(
        &analysis.adjacency,
        dual,
        &ordered_idempotents,
        &comm,
        cfg.seed,
        tol,
    )
    .map_err(tmodule_failure)?;

    let full_order = ordering.full();
    if modules.iter().any(|m| !m.thin) {
        let report = nonthin_report(graph, analysis, vertex, &fit, &full_order, &modules);
        let count = modules.iter().filter(|m| !m.thin).count();
        return Err(StageFailure {
            exit_code: 5,
            stage: "modules",
            message: format!("{count} irreducible module(s) are not thin"),
            report: Some(Box::new(report)),
        });
    }

    let restricted: Vec<RestrictedLeonard> = modules
        .iter()
        .map(|m| {
            restrict_leonard(
                m,
                &gens.gen_a,
                &gens.gen_b,
                &ordered_idempotents,
                &dual.dual_idempotents,
                &fit,
                tol,
            )
        })
        .collect::<Result<_, _>>()
        .map_err(leonard_failure)?;

    let arrays: Vec<Vec<C64>> = restricted.iter().map(|r| r.parameter_array()).collect();
    let types = classify_types(&mut modules, &arrays, &gens.gen_a, &gens.gen_b, tol)
        .map_err(tmodule_failure)?;

    let mut scalars = Vec::with_capacity(types.len());
    let mut types_report = Vec::with_capacity(types.len());
    for t in &types {
        let rl = &restricted[t.representative];
        let (kappa, c) = kappa_c(rl, fit.q);
        module_a_epsilon(rl, fit.q, c, tol).map_err(leonard_failure)?;
        let s = TypeScalars {
            a: rl.a_w,
            b: rl.b_w,
            c,
            diameter: rl.d,
        };
        scalars.push(s);
        types_report.push(TypeReport::new(t, &s, kappa));
    }

    let elements = central_elements(&types, &scalars, fit.q, &gens.gen_a, &gens.gen_b, tol)
        .map_err(aw_failure)?;
    let cert = certify_relations(&gens.gen_a, &gens.gen_b, &elements, fit.q, &algebra);

    let attempt = AttemptData {
        fit,
        ordering: full_order,
        types_report,
        dims: DimsReport {
            t: algebra.dim(),
            commutant: comm.len(),
        },
        residuals: ResidualsReport::from(&cert),
        worst_rel: cert.worst_rel(),
        thin: true,
    };

    if attempt.worst_rel > tol {
        let report = build_report(graph, analysis, vertex, &attempt, "residual");
        return Err(StageFailure {
            exit_code: 6,
            stage: "relations",
            message: format!(
                "worst relative residual {:.3e} exceeds tolerance {:.3e}",
                attempt.worst_rel, tol
            ),
            report: Some(Box::new(report)),
        });
    }

    Ok(build_report(graph, analysis, vertex, &attempt, "ok"))
}

/// Runs every (ordering, q-branch) attempt at one vertex.
pub fn analyze_vertex(
    graph: &Graph,
    analysis: &GraphAnalysis,
    vertex: usize,
    cfg: &PipelineConfig,
) -> Vec<Attempt> {
    let mut attempts = Vec::new();
    for (ordering_index, ordering) in analysis.orderings.iter().enumerate() {
        let dual = match build_dual_data(&analysis.spec, ordering, &analysis.data, vertex, cfg.tol)
        {
            Ok(d) => d,
            Err(e) => {
                attempts.push(Attempt {
                    vertex,
                    ordering_index,
                    q_index: 0,
                    outcome: Err(tmodule_failure(e)),
                });
                continue;
            }
        };
        let theta = ordered_eigenvalues(&analysis.spec, ordering);
        let candidates = match fit_base_q(&theta, cfg.tol) {
            Ok(c) => c,
            Err(e) => {
                attempts.push(Attempt {
                    vertex,
                    ordering_index,
                    q_index: 0,
                    outcome: Err(qracah_failure(e)),
                });
                continue;
            }
        };
        let take = if cfg.q_branch_all { candidates.len() } else { 1 };
        for (q_index, &q) in candidates.iter().take(take).enumerate() {
            let outcome = run_attempt(graph, analysis, vertex, ordering, &dual, &theta, q, cfg);
            attempts.push(Attempt {
                vertex,
                ordering_index,
                q_index,
                outcome,
            });
        }
    }
    attempts
}

/// Everything a command run produced: successful reports in deterministic
/// order plus every failure.
pub struct RunOutcome {
    pub reports: Vec<Report>,
    pub failures: Vec<StageFailure>,
}

impl RunOutcome {
    /// Exit 0 on any fully certified attempt, otherwise the code of the
    /// deepest failure.
    pub fn exit_code(&self) -> i32 {
        if self.reports.iter().any(|r| r.status == "ok") {
            0
        } else {
            self.failures.iter().map(|f| f.exit_code).max().unwrap_or(0)
        }
    }
}

/// Full analysis over a set of base vertices.
pub fn analyze(graph: &Graph, vertices: &[usize], cfg: &PipelineConfig) -> RunOutcome {
    let analysis = match prepare(graph, cfg.tol) {
        Ok(a) => a,
        Err(e) => {
            return RunOutcome {
                reports: Vec::new(),
                failures: vec![e],
            }
        }
    };
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &vertex in vertices {
        for attempt in analyze_vertex(graph, &analysis, vertex, cfg) {
            match attempt.outcome {
                Ok(r) => reports.push(r),
                Err(mut f) => {
                    // failed attempts that still assembled a report (non-thin
                    // or residual status) emit it alongside the diagnostics
                    if let Some(r) = f.report.take() {
                        reports.push(*r);
                    }
                    failures.push(f);
                }
            }
        }
    }
    RunOutcome { reports, failures }
}

/// The `spectrum` stage as a standalone run.
pub fn spectrum_run(graph: &Graph, tol: f64) -> Result<SpectrumReport, StageFailure> {
    let data = compute_distance_data(graph).map_err(graph_failure)?;
    let spec = spectral_decomposition(graph, &data, tol).map_err(spectral_failure)?;
    let krein = krein_parameters(&spec, tol).map_err(spectral_failure)?;
    let orderings = find_qpoly_orderings(&krein).map_err(spectral_failure)?;
    Ok(SpectrumReport {
        graph: graph.name().to_string(),
        n: graph.n(),
        diameter: data.diameter,
        eigenvalues: spec.eigenvalues.iter().map(|&t| quantize(t)).collect(),
        multiplicities: spec.multiplicities.clone(),
        krein_min: quantize(krein.min_value),
        orderings: orderings.iter().map(|o| o.full()).collect(),
    })
}

/// The pipeline through the q-Racah fit, one report per attempt.
pub fn qracah_run(
    graph: &Graph,
    vertices: &[usize],
    cfg: &PipelineConfig,
) -> (Vec<QRacahReport>, Vec<StageFailure>) {
    let analysis = match prepare(graph, cfg.tol) {
        Ok(a) => a,
        Err(e) => return (Vec::new(), vec![e]),
    };
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &vertex in vertices {
        for ordering in &analysis.orderings {
            let dual =
                match build_dual_data(&analysis.spec, ordering, &analysis.data, vertex, cfg.tol) {
                    Ok(d) => d,
                    Err(e) => {
                        failures.push(tmodule_failure(e));
                        continue;
                    }
                };
            let theta = ordered_eigenvalues(&analysis.spec, ordering);
            let candidates = match fit_base_q(&theta, cfg.tol) {
                Ok(c) => c,
                Err(e) => {
                    failures.push(qracah_failure(e));
                    continue;
                }
            };
            let take = if cfg.q_branch_all { candidates.len() } else { 1 };
            for &q in candidates.iter().take(take) {
                match assemble_fit(&theta, &dual.dual_eigenvalues, q, cfg.tol) {
                    Ok(fit) => {
                        let f = Report::fit_fields(&fit);
                        reports.push(QRacahReport {
                            graph: graph.name().to_string(),
                            n: graph.n(),
                            diameter: analysis.data.diameter,
                            vertex,
                            ordering: ordering.full(),
                            q: f[0],
                            w: f[1],
                            u: f[2],
                            v: f[3],
                            wstar: f[4],
                            ustar: f[5],
                            vstar: f[6],
                            a: f[7],
                            b: f[8],
                            residual: quantize(fit.residual),
                        });
                    }
                    Err(e) => failures.push(qracah_failure(e)),
                }
            }
        }
    }
    (reports, failures)
}

/// The pipeline through module decomposition, one report per (vertex,
/// ordering).
pub fn modules_run(
    graph: &Graph,
    vertices: &[usize],
    cfg: &PipelineConfig,
) -> (Vec<ModulesReport>, Vec<StageFailure>) {
    let analysis = match prepare(graph, cfg.tol) {
        Ok(a) => a,
        Err(e) => return (Vec::new(), vec![e]),
    };
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &vertex in vertices {
        for ordering in &analysis.orderings {
            match modules_attempt(graph, &analysis, vertex, ordering, cfg) {
                Ok(r) => reports.push(r),
                Err(e) => failures.push(e),
            }
        }
    }
    (reports, failures)
}

fn modules_attempt(
    graph: &Graph,
    analysis: &GraphAnalysis,
    vertex: usize,
    ordering: &QPolyOrdering,
    cfg: &PipelineConfig,
) -> Result<ModulesReport, StageFailure> {
    let dual = build_dual_data(&analysis.spec, ordering, &analysis.data, vertex, cfg.tol)
        .map_err(tmodule_failure)?;
    let ordered_idempotents: Vec<CMat> = ordering
        .full()
        .iter()
        .map(|&k| analysis.spec.idempotents[k].clone())
        .collect();
    let n = graph.n();
    let algebra = algebra_closure(
        &[analysis.adjacency.clone(), dual.dual_adjacency.clone()],
        n * n,
        cfg.tol,
    )
    .map_err(tmodule_failure)?;
    let comm = commutant(&analysis.adjacency, &dual, cfg.tol).map_err(tmodule_failure)?;
    let modules = decompose_modules(
        &analysis.adjacency,
        &dual,
        &ordered_idempotents,
        &comm,
        cfg.seed,
        cfg.tol,
    )
    .map_err(tmodule_failure)?;

    let mut entries: Vec<InventoryEntry> = Vec::new();
    for m in &modules {
        if let Some(e) = entries
            .iter_mut()
            .find(|e| (e.rho, e.tau, e.d) == (m.endpoint, m.dual_endpoint, m.diameter))
        {
            e.multiplicity += 1;
            e.dimension += m.dim();
        } else {
            entries.push(InventoryEntry {
                rho: m.endpoint,
                tau: m.dual_endpoint,
                d: m.diameter,
                multiplicity: 1,
                dimension: m.dim(),
            });
        }
    }
    Ok(ModulesReport {
        graph: graph.name().to_string(),
        n: graph.n(),
        diameter: analysis.data.diameter,
        vertex,
        ordering: ordering.full(),
        types: entries,
        dims: DimsReport {
            t: algebra.dim(),
            commutant: comm.len(),
        },
        thin: modules.iter().all(|m| m.thin),
    })
}
