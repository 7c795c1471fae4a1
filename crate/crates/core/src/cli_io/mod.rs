//! Run configurations, the two experiment presets, and the files written by a
//! run: `estimators.csv`, `fields_t<time>.dat` and `summary.txt`.

mod dump;

pub use dump::{read_field_dump, FieldDump};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adaptivity::{run_adaptive, AdaptConfig, AdaptiveRun, RunOptions};
use crate::estimator::{Estimator, Estimator1D, Estimator2D};
use crate::flux::{burgers_1d, burgers_2d, linear, FluxModel, Richtmyer, StateSet};
use crate::mesh::{Boundary, Mesh1D, Mesh2D};
use crate::solver::{InitialCondition, Scheme1D, Scheme2D, SolverConfig};
use crate::{Error, Result};

/// Header of `estimators.csv`.
pub const CSV_HEADER: [&str; 8] = [
    "t",
    "E_M_inc",
    "E_D_inc",
    "cum_E_M",
    "cum_E_D",
    "total_bound",
    "error_L2",
    "active_measure",
];

/// Flat parameter set of a run. Keys missing from a configuration file are
/// taken from the preset named by `preset` (default `test1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    /// 1 or 2.
    pub dim: usize,
    /// `burgers` or `linear`.
    pub flux: String,
    /// Advection velocity of the linear flux, one entry per direction.
    pub velocity: Vec<f64>,
    /// Domain `[domain_min, domain_max]^dim`.
    pub domain_min: f64,
    pub domain_max: f64,
    /// Cells per direction.
    pub cells: usize,
    pub degree: usize,
    pub tau: f64,
    pub t_final: f64,
    pub eps: f64,
    pub sigma: f64,
    pub tol: f64,
    pub tol_c: f64,
    pub theta: f64,
    /// `periodic` or `dirichlet`.
    pub boundary: String,
    /// `sine`, `gaussian`, `gaussian(a)` or `constant(c)`.
    pub initial: String,
    /// Admissible state set `[state_min, state_max]`.
    pub state_min: f64,
    pub state_max: f64,
    pub snapshots: Vec<f64>,
    pub reference: bool,
    pub max_steps: Option<usize>,
    pub output: Option<PathBuf>,
}

/// 1D Burgers on `[-pi, pi]` with `u_0 = sin x` and homogeneous Dirichlet data.
pub fn preset_test1() -> RunConfig {
    RunConfig {
        name: "test1".into(),
        dim: 1,
        flux: "burgers".into(),
        velocity: vec![1.0],
        domain_min: -std::f64::consts::PI,
        domain_max: std::f64::consts::PI,
        cells: 1000,
        degree: 1,
        tau: 1e-4,
        t_final: 2.5,
        eps: 0.005,
        sigma: 10.0,
        tol: 1e-2,
        tol_c: 1e-3,
        theta: 0.5,
        boundary: "dirichlet".into(),
        initial: "sine".into(),
        state_min: -2.0,
        state_max: 2.0,
        snapshots: vec![0.0, 0.5375, 1.1625, 1.3, 1.55, 2.5],
        reference: true,
        max_steps: None,
        output: None,
    }
}

/// 2D Burgers on `[-1, 1]^2` with `u_0 = exp(-10 |x|^2)`, periodic.
pub fn preset_test2() -> RunConfig {
    RunConfig {
        name: "test2".into(),
        dim: 2,
        flux: "burgers".into(),
        velocity: vec![1.0, 1.0],
        domain_min: -1.0,
        domain_max: 1.0,
        cells: 71,
        degree: 1,
        tau: std::f64::consts::SQRT_2 / 400.0,
        t_final: 1.5,
        eps: 0.01,
        sigma: 10.0,
        tol: 1e-2,
        tol_c: 1e-3,
        theta: 0.5,
        boundary: "periodic".into(),
        initial: "gaussian".into(),
        state_min: -2.0,
        state_max: 2.0,
        snapshots: vec![0.0025, 0.25, 0.5, 1.0, 1.25, 1.5],
        reference: true,
        max_steps: None,
        output: None,
    }
}

pub fn preset(name: &str) -> Option<RunConfig> {
    match name {
        "test1" => Some(preset_test1()),
        "test2" => Some(preset_test2()),
        _ => None,
    }
}

impl RunConfig {
    /// Parse a flat TOML configuration.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let base_name = match table.remove("preset") {
            Some(toml::Value::String(s)) => s,
            Some(v) => return Err(Error::Parse(format!("preset must be a string, got {v}"))),
            None => "test1".into(),
        };
        let base = preset(&base_name).ok_or_else(|| Error::Parse(format!("unknown preset '{base_name}'")))?;
        let mut merged = toml::Table::try_from(&base).map_err(|e| Error::Parse(e.to_string()))?;
        merged.extend(table);
        let cfg: RunConfig = merged.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// A preset name or the path of a configuration file.
    pub fn load(target: &str) -> Result<Self> {
        if let Some(p) = preset(target) {
            return Ok(p);
        }
        let text = fs::read_to_string(target)
            .map_err(|e| Error::InvalidConfiguration(format!("'{target}' is neither a preset nor a readable file: {e}")))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfiguration(m));
        if self.dim != 1 && self.dim != 2 {
            return bad(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if self.cells == 0 || !(self.domain_max > self.domain_min) {
            return bad("need at least one cell and domain_min < domain_max".into());
        }
        for (k, v) in [("tau", self.tau), ("t_final", self.t_final), ("sigma", self.sigma), ("tol", self.tol), ("tol_c", self.tol_c)] {
            if !(v > 0.0) {
                return bad(format!("{k} must be positive, got {v}"));
            }
        }
        if !(self.eps >= 0.0) {
            return bad(format!("eps must be non-negative, got {}", self.eps));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad(format!("theta must lie in (0, 1], got {}", self.theta));
        }
        if let Some(t) = self.snapshots.iter().find(|&&t| !(0.0..=self.t_final).contains(&t)) {
            return bad(format!("snapshot time {t} outside [0, {}]", self.t_final));
        }
        if self.flux == "linear" && self.velocity.len() != self.dim {
            return bad(format!("linear flux needs {} velocity components", self.dim));
        }
        self.boundary_mode()?;
        self.initial_condition()?;
        self.flux_model()?;
        StateSet::new(self.state_min, self.state_max)?;
        Ok(())
    }

    pub fn boundary_mode(&self) -> Result<Boundary> {
        match self.boundary.as_str() {
            "periodic" => Ok(Boundary::Periodic),
            "dirichlet" => Ok(Boundary::Dirichlet),
            b => Err(Error::InvalidConfiguration(format!("unknown boundary '{b}'"))),
        }
    }

    pub fn initial_condition(&self) -> Result<InitialCondition> {
        let s = self.initial.trim();
        let arg = |prefix: &str| -> Option<Result<f64>> {
            s.strip_prefix(prefix).and_then(|r| r.strip_prefix('(')).and_then(|r| r.strip_suffix(')')).map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidConfiguration(format!("bad argument in '{s}': {e}")))
            })
        };
        match s {
            "sine" => Ok(InitialCondition::Sine),
            "gaussian" => Ok(InitialCondition::Gaussian { a: 10.0 }),
            _ => {
                if let Some(a) = arg("gaussian") {
                    Ok(InitialCondition::Gaussian { a: a? })
                } else if let Some(c) = arg("constant") {
                    Ok(InitialCondition::Constant(c?))
                } else {
                    Err(Error::InvalidConfiguration(format!("unknown initial condition '{s}'")))
                }
            }
        }
    }

    pub fn flux_model(&self) -> Result<Arc<dyn FluxModel>> {
        match (self.flux.as_str(), self.dim) {
            ("burgers", 1) => Ok(Arc::new(burgers_1d())),
            ("burgers", _) => Ok(Arc::new(burgers_2d())),
            ("linear", _) => Ok(Arc::new(linear(&self.velocity))),
            (f, _) => Err(Error::InvalidConfiguration(format!("unknown flux '{f}'"))),
        }
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(
            self.flux_model()?,
            self.degree,
            self.tau,
            self.t_final,
            self.eps,
            self.boundary_mode()?,
            self.initial_condition()?,
        );
        cfg.sigma = self.sigma;
        cfg.numflux = Arc::new(Richtmyer::new(StateSet::new(self.state_min, self.state_max)?));
        Ok(cfg)
    }

    pub fn adapt_config(&self) -> AdaptConfig {
        AdaptConfig {
            theta: self.theta,
            ..AdaptConfig::new(self.tol, self.tol_c, self.eps)
        }
    }
}

/// Headline numbers of a finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub final_bound: f64,
    pub final_error_l2: Option<f64>,
    pub max_error_linf: Option<f64>,
    pub peak_active_measure: f64,
    pub output_dir: PathBuf,
}

/// Run the adaptive scheme for `cfg` and write all output files to `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let solver = cfg.solver_config()?;
    let opts = RunOptions {
        max_steps: cfg.max_steps,
        reference: cfg.reference,
        snapshot_times: cfg.snapshots.clone(),
    };
    let bc = cfg.boundary_mode()?;
    if cfg.dim == 1 {
        let mesh = Mesh1D::uniform(cfg.domain_min, cfg.domain_max, cfg.cells, bc)?;
        let scheme = Scheme1D::new(mesh, solver)?;
        let est = Estimator1D::new(&scheme)?;
        let res = run_adaptive(&est, &cfg.adapt_config(), &opts)?;
        let space = scheme.space();
        let coords: Vec<Vec<f64>> = (0..space.n_cells())
            .flat_map(|k| (0..=space.degree()).map(move |p| vec![space.node_x(k, p)]))
            .collect();
        write_outputs(&est, &res, &coords, cfg, out)
    } else {
        let d = (cfg.domain_min, cfg.domain_max);
        let mesh = Mesh2D::uniform(d, d, cfg.cells, cfg.cells, bc)?;
        let scheme = Scheme2D::new(mesh, solver)?;
        let est = Estimator2D::new(&scheme)?;
        let res = run_adaptive(&est, &cfg.adapt_config(), &opts)?;
        let space = scheme.space();
        let coords: Vec<Vec<f64>> = (0..space.n_cells())
            .flat_map(|k| {
                (0..space.nodes_per_cell()).map(move |n| {
                    let (x, y) = space.node_xy(k, n);
                    vec![x, y]
                })
            })
            .collect();
        write_outputs(&est, &res, &coords, cfg, out)
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// File name of the dump at time `t`.
pub fn dump_name(t: f64) -> String {
    format!("fields_t{t:.4}.dat")
}

fn write_outputs<E: Estimator>(est: &E, res: &AdaptiveRun<E::Recon>, coords: &[Vec<f64>], cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    let mut w = csv::Writer::from_path(out.join("estimators.csv"))?;
    w.write_record(CSV_HEADER)?;
    for s in &res.steps {
        w.write_record([
            fmt(s.t),
            fmt(s.em_inc),
            fmt(s.ed_inc),
            fmt(s.cum_em),
            fmt(s.cum_ed),
            fmt(s.total_bound),
            s.error_l2.map(fmt).unwrap_or_default(),
            fmt(s.active_measure),
        ])?;
    }
    w.flush()?;

    let npc = res.final_field.nodes_per_cell();
    for snap in &res.snapshots {
        let mut f = std::io::BufWriter::new(fs::File::create(out.join(dump_name(snap.t)))?);
        writeln!(f, "# t = {}", fmt(snap.t))?;
        let axes = if cfg.dim == 1 { "x" } else { "x y" };
        writeln!(f, "# {axes} v_h v_hat eps_hat")?;
        for (i, x) in coords.iter().enumerate() {
            let k = i / npc;
            let vhat = est.recon_value(&snap.recon, x).unwrap_or(f64::NAN);
            let xs: Vec<String> = x.iter().map(|c| fmt(*c)).collect();
            writeln!(
                f,
                "{} {} {} {}",
                xs.join(" "),
                fmt(snap.v_h.values()[i]),
                fmt(vhat),
                fmt(snap.eps_hat.value(k))
            )?;
        }
        f.flush()?;
    }

    let last = res.steps.last();
    let summary = RunSummary {
        steps: res.steps.len(),
        final_time: last.map_or(0.0, |s| s.t),
        final_bound: last.map_or(res.breakdown.init_term, |s| s.total_bound),
        final_error_l2: last.and_then(|s| s.error_l2),
        max_error_linf: res.steps.iter().filter_map(|s| s.error_linf).reduce(f64::max),
        peak_active_measure: res.steps.iter().map(|s| s.active_measure).fold(0.0, f64::max),
        output_dir: out.to_path_buf(),
    };
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_else(|| "n/a".into());
    let mut f = fs::File::create(out.join("summary.txt"))?;
    writeln!(f, "name = {}", cfg.name)?;
    writeln!(f, "steps = {}", summary.steps)?;
    writeln!(f, "final_time = {}", fmt(summary.final_time))?;
    writeln!(f, "final_bound = {}", fmt(summary.final_bound))?;
    writeln!(f, "final_error_L2 = {}", opt(summary.final_error_l2))?;
    writeln!(f, "max_error_Linf = {}", opt(summary.max_error_linf))?;
    writeln!(f, "peak_active_measure = {}", fmt(summary.peak_active_measure))?;
    writeln!(f, "cum_E_M = {}", fmt(res.breakdown.cum_em))?;
    writeln!(f, "cum_E_D = {}", fmt(res.breakdown.cum_ed))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_carry_the_experiment_parameters() {
        let t1 = preset_test1();
        assert_eq!(t1.eps, 0.005);
        assert_eq!(t1.sigma, 10.0);
        assert!((t1.domain_max - t1.domain_min) / t1.cells as f64 - std::f64::consts::PI / 500.0 < 1e-15);
        assert_eq!(t1.snapshots, vec![0.0, 0.5375, 1.1625, 1.3, 1.55, 2.5]);
        let t2 = preset_test2();
        assert_eq!(t2.tau, 2f64.sqrt() / 400.0);
        assert_eq!(t2.snapshots, vec![0.0025, 0.25, 0.5, 1.0, 1.25, 1.5]);
        assert_eq!(t2.initial_condition().unwrap().eval(&[0.0, 0.0]), 1.0);
        t1.validate().unwrap();
        t2.validate().unwrap();
    }

    #[test]
    fn toml_round_trips_and_overrides_preset() {
        let t2 = preset_test2();
        assert_eq!(RunConfig::from_toml(&t2.to_toml().unwrap()).unwrap(), t2);
        let c = RunConfig::from_toml("preset = \"test2\"\ncells = 8\ntheta = 0.3\n").unwrap();
        assert_eq!((c.cells, c.theta, c.dim), (8, 0.3, 2));
        assert!(RunConfig::from_toml("celss = 3").is_err());
        assert!(RunConfig::from_toml("tau = -1.0").is_err());
        assert!(RunConfig::from_toml("snapshots = [9.0]").is_err());
    }

    #[test]
    fn initial_condition_names_parse() {
        let mut c = preset_test1();
        c.initial = "gaussian(4)".into();
        assert_eq!(c.initial_condition().unwrap().eval(&[0.5]), (-1.0f64).exp());
        c.initial = "constant(0.25)".into();
        assert_eq!(c.initial_condition().unwrap().eval(&[3.0]), 0.25);
        c.initial = "cosine".into();
        assert!(c.validate().is_err());
    }
}
