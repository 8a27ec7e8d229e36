use rand::Rng;
use serde_json::{json, Value};
use tjdiv::centroids::{left_sided_centroid, total_jensen_centroid};
use tjdiv::clustering::{
    brute_force_discrete_optimum, estimate_bound_constants, lloyd_cluster, model_from_rows, seed,
    seeding_bound_experiment, symmetry_surrogate, trial_rng, triangle_surrogate,
};
use tjdiv::divergences::{self, total_jensen_shannon};
use tjdiv::geometry::{geometric_oracle_tj, project_beta, second_kind_tj};
use tjdiv::robustness::{boundedness_sweep, influence_empirical, influence_empirical_total};
use tjdiv::{
    make_builtin, BoundConstants, CentroidConfig, ClusterModel, DivergenceKind, Generator64, InfluenceQuery, Init,
    SeedingConfig, Skew,
};

use crate::args::*;
use crate::dataset::{load_dataset, DatasetFile};
use crate::error::{CliError, CliResult};
use crate::report::{matrix, num, nums, RunReport};

/// Outcome of a command: the report and a one-line human summary.
pub struct Outcome {
    pub report: RunReport,
    pub summary: String,
}

pub fn run_command(cmd: &Command) -> CliResult<Outcome> {
    match cmd {
        Command::Divergence(a) => divergence(a),
        Command::Project(a) => project(a),
        Command::Centroid(a) => centroid(a),
        Command::Influence(a) => influence(a),
        Command::Seed(a) => seed_cmd(a),
        Command::Cluster(a) => cluster(a),
        Command::BoundExperiment(a) => bound_experiment(a),
        Command::Constants(a) => constants(a),
        Command::MetricCheck(a) => metric_check(a),
    }
}

pub fn parse_point(s: &str) -> CliResult<Vec<f64>> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::Usage(format!("cannot parse point `{s}`"))),
    }
}

fn parse_matrix(s: &str) -> CliResult<(Vec<f64>, usize)> {
    let rows: Vec<Vec<f64>> = s.split(';').map(parse_point).collect::<CliResult<_>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage(format!("matrix `{s}` is not square")));
    }
    Ok((rows.concat(), n))
}

fn generator(args: &GeneratorArgs, dim: usize) -> CliResult<Generator64> {
    let m = match &args.matrix {
        Some(s) => {
            let (m, n) = parse_matrix(s)?;
            if n != dim {
                return Err(CliError::Invalid(format!("matrix is {n}x{n} but the data has dimension {dim}")));
            }
            Some(m)
        }
        None => None,
    };
    Ok(make_builtin(&args.generator, dim, m.as_deref())?)
}

fn echo_generator(r: &mut RunReport, args: &GeneratorArgs) {
    r.param("generator", args.generator.clone());
    if let Some(m) = &args.matrix {
        r.param("matrix", m.clone());
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> CliResult<&'a str> {
    v.as_deref().ok_or_else(|| CliError::Usage(format!("--{flag} is required for this kind")))
}

fn divergence(a: &DivergenceArgs) -> CliResult<Outcome> {
    let mut r = RunReport::new("divergence");
    r.param("kind", a.kind.as_str());
    let value = match a.kind {
        DivergenceKind::KlGaussian => {
            let (mu1, s1) = (parse_point(required(&a.mu1, "mu1")?)?, parse_point(required(&a.sigma1, "sigma1")?)?);
            let (mu2, s2) = (parse_point(required(&a.mu2, "mu2")?)?, parse_point(required(&a.sigma2, "sigma2")?)?);
            for (k, v) in [("mu1", &a.mu1), ("sigma1", &a.sigma1), ("mu2", &a.mu2), ("sigma2", &a.sigma2)] {
                r.param(k, v.clone().unwrap_or_default());
            }
            divergences::kl_gaussian(&mu1, &s1, &mu2, &s2)?
        }
        _ => {
            let p = parse_point(required(&a.p, "p")?)?;
            let q = parse_point(required(&a.q, "q")?)?;
            r.param("p", nums(&p));
            r.param("q", nums(&q));
            match a.kind {
                DivergenceKind::JensenShannon => divergences::jensen_shannon(&p, &q)?,
                DivergenceKind::TotalJensenShannon => divergences::total_jensen_shannon(&p, &q)?,
                kind => {
                    echo_generator(&mut r, &a.generator);
                    let g = generator(&a.generator, p.len())?;
                    let al = Skew::new(a.alpha);
                    r.param("alpha", num(a.alpha));
                    match kind {
                        DivergenceKind::JensenRaw => divergences::jensen_raw(&g, al, &p, &q)?,
                        DivergenceKind::JensenScaled => divergences::jensen_scaled(&g, al, &p, &q)?,
                        DivergenceKind::Bregman => divergences::bregman(&g, &p, &q)?,
                        DivergenceKind::TotalBregman => divergences::total_bregman(&g, &p, &q)?,
                        DivergenceKind::TotalJensen => divergences::total_jensen(&g, al, &p, &q)?,
                        _ => divergences::total_jensen_raw(&g, al, &p, &q)?,
                    }
                }
            }
        }
    };
    r.phase("compute");
    let mut res = json!({ "kind": value.kind.as_str(), "value": num(value.value) });
    if let Some(f) = &value.factors {
        res["rho_j"] = num(f.rho_j);
        res["slope_sq"] = num(f.slope_sq);
        res["rho_b_p"] = f.rho_b_p.map(num).unwrap_or(Value::Null);
        res["rho_b_q"] = f.rho_b_q.map(num).unwrap_or(Value::Null);
    }
    r.results = res;
    let summary = format!("{} = {}", value.kind, value.value);
    Ok(Outcome { report: r, summary })
}

fn project(a: &ProjectArgs) -> CliResult<Outcome> {
    let mut r = RunReport::new("project");
    let p = parse_point(&a.p)?;
    let q = parse_point(&a.q)?;
    echo_generator(&mut r, &a.generator);
    r.param("alpha", num(a.alpha));
    r.param("p", nums(&p));
    r.param("q", nums(&q));
    let g = generator(&a.generator, p.len())?;
    let al = Skew::new(a.alpha);
    let proj = project_beta(&g, al, &p, &q)?;
    let oracle = geometric_oracle_tj(&g, al, &p, &q)?;
    let mut res = json!({
        "beta": num(proj.beta),
        "foot_point": nums(&proj.foot_point),
        "foot_value": num(proj.foot_value),
        "distance": num(proj.distance),
        "oracle_distance": num(oracle),
        "j_raw": num(proj.j_raw),
        "rho_j": num(proj.rho_j),
        "pythagoras_residual": num(proj.pythagoras_residual),
        "orthogonality_residual": num(proj.orthogonality_residual),
    });
    if let Some(beta) = a.beta {
        r.param("beta", num(beta));
        let s = second_kind_tj(&g, beta, &p, &q, 1e-14)?;
        res["second_kind"] = json!({ "alpha": num(s.alpha), "value": num(s.value) });
    }
    r.phase("compute");
    r.results = res;
    let summary = format!("beta = {}, distance = {}", proj.beta, proj.distance);
    Ok(Outcome { report: r, summary })
}

fn load(r: &mut RunReport, path: &std::path::Path, weights: Option<&str>) -> CliResult<DatasetFile> {
    r.param("input", path.display().to_string());
    if let Some(w) = weights {
        r.param("weights", w);
    }
    let d = load_dataset(path, weights)?;
    r.phase("load");
    Ok(d)
}

fn centroid(a: &CentroidArgs) -> CliResult<Outcome> {
    let mut r = RunReport::new("centroid");
    let data = load(&mut r, &a.input, a.weights.as_deref())?;
    echo_generator(&mut r, &a.generator);
    let g = generator(&a.generator, data.dimension)?;
    data.check_domain(&g, true)?;
    let set = data.point_set()?;
    let mut cfg = CentroidConfig::new(Skew::new(a.alpha));
    cfg.inner_iters = a.inner_iters;
    cfg.outer_tol = a.outer_tol;
    cfg.outer_max_iters = a.max_iters;
    cfg.refine = !a.no_refine;
    if let Some(s) = &a.init {
        cfg.init = Init::Point(parse_point(s)?);
        r.param("init", s.clone());
    }
    for (k, v) in [
        ("alpha", num(a.alpha)),
        ("side", Value::from(if a.side == Side::Right { "right" } else { "left" })),
        ("inner_iters", Value::from(a.inner_iters)),
        ("outer_tol", num(a.outer_tol)),
        ("max_iters", Value::from(a.max_iters)),
        ("refine", Value::from(cfg.refine)),
    ] {
        r.param(k, v);
    }
    let res = match a.side {
        Side::Right => total_jensen_centroid(&g, &set, &cfg)?,
        Side::Left => left_sided_centroid(&g, &set, &cfg)?,
    };
    r.phase("compute");
    r.results = json!({
        "center": nums(&res.center),
        "loss": num(res.loss),
        "loss_trace": nums(&res.loss_trace),
        "iterations": res.iterations,
        "converged": res.converged,
        "two_stage_center": nums(&res.two_stage_center),
        "two_stage_loss": num(res.two_stage_loss),
        "refine_iterations": res.refine_iterations,
        "clamped": res.clamped,
        "weights": nums(set.weights()),
    });
    let summary = format!(
        "center {:?}, loss {} after {} stages (converged: {})",
        res.center, res.loss, res.iterations, res.converged
    );
    Ok(Outcome { report: r, summary })
}

fn influence(a: &InfluenceArgs) -> CliResult<Outcome> {
    let mut r = RunReport::new("influence");
    echo_generator(&mut r, &a.generator);
    r.param("p", num(a.p));
    r.param("ymax", num(a.ymax));
    r.param("per_decade", a.per_decade);
    r.param("empirical", a.empirical);
    if a.empirical {
        r.param("eps", num(a.eps));
        r.param("total", a.total);
    }
    let g = generator(&a.generator, 1)?;
    let sweep = boundedness_sweep(&g, a.p, a.ymax, a.per_decade)?;
    let mut rows = Vec::with_capacity(sweep.rows.len());
    for row in &sweep.rows {
        let mut v = json!({ "y": num(row.y), "z_analytic": num(row.z), "rho_j": num(row.rho_j) });
        if a.empirical {
            let q = InfluenceQuery::new(a.p, row.y, a.eps)?;
            v["z_empirical"] = num(influence_empirical(&g, &q)?.z_empirical);
            if a.total {
                v["z_empirical_total"] = num(influence_empirical_total(&g, &q)?);
            }
        }
        rows.push(v);
    }
    r.phase("compute");
    r.results = json!({
        "table": rows,
        "sup_abs_z": num(sweep.sup_abs_z),
        "decade_abs_z": nums(&sweep.decade_abs_z),
        "growth": sweep.growth.as_str(),
        "bounded_estimate": sweep.bounded_estimate(),
        "rho_log_y_last": num(sweep.rho_log_y_last),
    });
    let summary = format!("sup |z| = {} ({})", sweep.sup_abs_z, sweep.growth.as_str());
    Ok(Outcome { report: r, summary })
}

struct Prepared {
    data: DatasetFile,
    g: Generator64,
    cfg: SeedingConfig<f64>,
}

fn prepare_clustering(r: &mut RunReport, c: &ClusterCommon, interior: bool) -> CliResult<Prepared> {
    let data = load(r, &c.input, None)?;
    echo_generator(r, &c.generator);
    let g = generator(&c.generator, data.dimension)?;
    data.check_domain(&g, interior)?;
    let rng_seed = resolve_seed(c.rng_seed);
    r.param("alpha", num(c.alpha));
    r.param("k", c.k);
    r.param("rng_seed", rng_seed);
    Ok(Prepared { data, g, cfg: SeedingConfig::new(c.k, Skew::new(c.alpha), rng_seed) })
}

fn model_json(m: &ClusterModel<f64>) -> Value {
    json!({
        "centers": matrix(&m.centers),
        "center_rows": m.center_rows.clone().map(Value::from).unwrap_or(Value::Null),
        "assignments": m.assignments.clone(),
        "potential": num(m.potential),
    })
}

fn seed_cmd(c: &ClusterCommon) -> CliResult<Outcome> {
    let mut r = RunReport::new("seed");
    let p = prepare_clustering(&mut r, c, false)?;
    let rows = seed(&p.g, &p.data.rows, &p.cfg)?;
    let model = model_from_rows(&p.g, p.cfg.alpha, &p.data.rows, &rows)?;
    r.phase("compute");
    r.results = model_json(&model);
    let summary = format!("rows {:?}, potential {} (rng seed {})", rows, model.potential, p.cfg.rng_seed);
    Ok(Outcome { report: r, summary })
}

fn cluster(a: &LloydArgs) -> CliResult<Outcome> {
    let mut r = RunReport::new("cluster");
    let p = prepare_clustering(&mut r, &a.common, true)?;
    r.param("max_rounds", a.max_rounds);
    let ccfg = CentroidConfig::new(p.cfg.alpha);
    let model = lloyd_cluster(&p.g, &p.data.rows, &p.cfg, &ccfg, a.max_rounds)?;
    r.phase("compute");
    let mut res = model_json(&model);
    res["rounds"] = Value::from(model.rounds);
    res["converged"] = Value::from(model.converged);
    res["repairs"] = Value::from(model.repairs);
    res["assignment_log"] =
        Value::Array(model.assignment_log.iter().map(|&(b, a)| json!({"before": num(b), "after": num(a)})).collect());
    r.results = res;
    let summary = format!(
        "potential {} after {} rounds (converged: {}, rng seed {})",
        model.potential, model.rounds, model.converged, p.cfg.rng_seed
    );
    Ok(Outcome { report: r, summary })
}

fn constants_json(c: &BoundConstants<f64>, k: usize) -> Value {
    json!({
        "k1_hat": num(c.k1_hat),
        "k2_hat": num(c.k2_hat),
        "rho_min": num(c.rho_min),
        "rho_max": num(c.rho_max),
        "rho_exact": c.rho_exact,
        "samples": c.samples,
        "unbounded_at": c.unbounded_at.clone().map(Value::from).unwrap_or(Value::Null),
        "epsilon_unestimated": c.epsilon_unestimated,
        "bound_curve": c.bound_curve(k).iter().map(|&(e, m)| json!({
            "epsilon": num(e), "u": num(c.u(e)), "v": num(c.v(e)), "multiplier": num(m),
        })).collect::<Vec<_>>(),
    })
}

fn bound_experiment(a: &ExperimentArgs) -> CliResult<Outcome> {
    let mut r = RunReport::new("bound-experiment");
    let mut p = prepare_clustering(&mut r, &a.common, false)?;
    p.cfg.trials = a.trials;
    r.param("trials", a.trials);
    r.param("epsilon", num(a.epsilon));
    r.param("samples", a.samples);
    let e = seeding_bound_experiment(&p.g, &p.data.rows, &p.cfg, a.epsilon, a.samples)?;
    r.phase("compute");
    r.results = json!({
        "trials": e.trials,
        "mean_potential": num(e.mean_potential),
        "optimum": model_json(&e.optimum),
        "ratio": num(e.ratio),
        "epsilon": num(e.epsilon),
        "multiplier": num(e.multiplier),
        "bound_holds": e.bound_holds.map(Value::from).unwrap_or(Value::Null),
        "constants": constants_json(&e.constants, p.cfg.k),
    });
    let summary = format!(
        "mean potential / optimum = {} (multiplier {} at eps {}, rng seed {})",
        e.ratio, e.multiplier, e.epsilon, p.cfg.rng_seed
    );
    Ok(Outcome { report: r, summary })
}

fn constants(a: &ConstantsArgs) -> CliResult<Outcome> {
    let mut r = RunReport::new("constants");
    let p = prepare_clustering(&mut r, &a.common, false)?;
    r.param("samples", a.samples);
    let c = estimate_bound_constants(&p.g, &p.data.rows, a.samples, p.cfg.rng_seed)?;
    let mut res = constants_json(&c, p.cfg.k);
    if c.unbounded_at.is_none() {
        res["triangle_surrogate"] =
            num(triangle_surrogate(&p.g, p.cfg.alpha, &p.data.rows, a.samples, p.cfg.rng_seed)?);
        res["symmetry_surrogate"] =
            num(symmetry_surrogate(&p.g, p.cfg.alpha, &p.data.rows, a.samples, p.cfg.rng_seed)?);
    }
    if tjdiv::clustering::binomial(p.data.rows.len(), p.cfg.k) <= tjdiv::clustering::BRUTE_FORCE_BUDGET {
        let opt = brute_force_discrete_optimum(&p.g, p.cfg.alpha, &p.data.rows, p.cfg.k)?;
        res["discrete_optimum"] = model_json(&opt);
    }
    r.phase("compute");
    r.results = res;
    let summary = format!(
        "K1 = {}, K2 = {}, rho in [{}, {}] (rng seed {})",
        c.k1_hat, c.k2_hat, c.rho_min, c.rho_max, p.cfg.rng_seed
    );
    Ok(Outcome { report: r, summary })
}

/// Triple of binary distributions whose square-rooted total Jensen-Shannon
/// distances break the triangle inequality.
pub const COUNTEREXAMPLE: [[f64; 2]; 3] = [[0.98, 0.02], [0.52, 0.48], [0.006, 0.994]];

/// `(d(p,q), d(q,r), d(p,r), d(p,r) - d(p,q) - d(q,r))` with `d = sqrt(tJS)`.
pub fn triangle_deficiency(p: &[f64], q: &[f64], r: &[f64]) -> CliResult<[f64; 4]> {
    let d = |a: &[f64], b: &[f64]| -> CliResult<f64> { Ok(total_jensen_shannon(a, b)?.value.sqrt()) };
    let (d1, d2, d3) = (d(p, q)?, d(q, r)?, d(p, r)?);
    Ok([d1, d2, d3, d3 - (d1 + d2)])
}

fn simplex_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn metric_check(a: &MetricArgs) -> CliResult<Outcome> {
    let mut r = RunReport::new("metric-check");
    r.param("search", a.search);
    let [p, q, s] = COUNTEREXAMPLE;
    let [d1, d2, d3, def] = triangle_deficiency(&p, &q, &s)?;
    let mut res = json!({
        "p": nums(&p), "q": nums(&q), "r": nums(&s),
        "d1": num(d1), "d2": num(d2), "d3": num(d3),
        "deficiency": num(def),
        "violates_triangle_inequality": def > 0.0,
    });
    let mut summary = format!("d1 = {d1}, d2 = {d2}, d3 = {d3}, deficiency = {def}");
    if a.search {
        if a.dim < 2 {
            return Err(CliError::Usage("--dim must be at least 2".into()));
        }
        let rng_seed = resolve_seed(a.rng_seed);
        r.param("trials", a.trials);
        r.param("dim", a.dim);
        r.param("rng_seed", rng_seed);
        let mut rng = trial_rng(rng_seed, 0);
        let mut worst: Option<(f64, [Vec<f64>; 3])> = None;
        let mut violations = 0usize;
        for _ in 0..a.trials {
            let t = [simplex_point(&mut rng, a.dim), simplex_point(&mut rng, a.dim), simplex_point(&mut rng, a.dim)];
            // Try each point as the middle vertex.
            for (x, y, z) in [(0, 1, 2), (1, 0, 2), (0, 2, 1)] {
                let v = triangle_deficiency(&t[x], &t[y], &t[z])?[3];
                if v > 0.0 {
                    violations += 1;
                }
                if worst.as_ref().map(|w| v > w.0).unwrap_or(true) {
                    worst = Some((v, [t[x].clone(), t[y].clone(), t[z].clone()]));
                }
            }
        }
        let (v, [x, y, z]) = worst.expect("at least one trial");
        res["search"] = json!({
            "violations": violations,
            "worst_deficiency": num(v),
            "worst_triple": matrix(&[x, y, z]),
        });
        summary.push_str(&format!("; search: {violations} violations, worst {v} (rng seed {rng_seed})"));
    }
    r.phase("compute");
    r.results = res;
    Ok(Outcome { report: r, summary })
}
