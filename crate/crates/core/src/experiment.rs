//! Configuration-driven experiments: bound tables, W1 estimates and the
//! identity/property battery.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::{verify_zero_bias_identity, Family, MuBreveMixture, SumModel};
use crate::bounds::{bound_m1, bound_m2, bound_m3};
use crate::error::{Error, Result};
use crate::function::{battery, oblique_direction, Profile, Ridge, TestFunction};
use crate::mc::{self, derive_seed, Welford};
use crate::sampler::StandardNormal;
use crate::smoothing::{constants_c_quadrature, SmoothingConstants};
use crate::stein::{circum_bound_check_with, slepian_residual, stein_apply, ANGLE_QUAD_TOL};
use crate::wasserstein::{log_log_slope, rate_fit, sampling_floor, w1_estimate};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(t) => vec![t.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// One family name or a list of them.
    #[serde(alias = "families")]
    pub family: OneOrMany<String>,
    pub d: OneOrMany<usize>,
    pub n: Vec<usize>,
    /// Probability of the rare atom for the `two-point` family.
    #[serde(default)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_mc_n")]
    pub mc_n: usize,
}

fn default_m() -> usize {
    2000
}
fn default_replications() -> usize {
    50
}
fn default_mc_n() -> usize {
    200_000
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            m: default_m(),
            replications: default_replications(),
            mc_n: default_mc_n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub csv: Option<String>,
}

/// Experiment description; `seed` is mandatory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub model: ModelConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn families(&self) -> Result<Vec<Family>> {
        self.model
            .family
            .to_vec()
            .iter()
            .map(|name| Family::parse(name, self.model.p))
            .collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.model.d.to_vec()
    }

    pub fn validate(&self) -> Result<()> {
        let fams = self.model.family.to_vec();
        if fams.is_empty() {
            return Err(Error::Config("at least one family is required".into()));
        }
        for f in self.families()? {
            if let Family::TwoPoint { p } = f {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Config(format!("two-point p must lie in (0, 1), got {p}")));
                }
            }
        }
        let dims = self.dims();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Config("d must be a nonempty list of positive integers".into()));
        }
        if self.model.n.is_empty() || self.model.n.contains(&0) {
            return Err(Error::Config("n must be a nonempty list of positive integers".into()));
        }
        let e = &self.estimator;
        if e.m < 10 {
            return Err(Error::Config(format!("estimator.m must be at least 10, got {}", e.m)));
        }
        if e.replications < 20 {
            return Err(Error::Config(format!(
                "estimator.replications must be at least 20, got {}",
                e.replications
            )));
        }
        if e.mc_n == 0 {
            return Err(Error::Config("estimator.mc_n must be positive".into()));
        }
        Ok(())
    }
}

/// One `(family, d, n)` cell of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub family: String,
    pub d: usize,
    pub n: usize,
    pub bound_m1: f64,
    pub bound_m2: f64,
    pub bound_m3: f64,
    pub w1_value: f64,
    pub w1_ci_lo: f64,
    pub w1_ci_hi: f64,
    pub seed: u64,
}

/// Seed of one cell, derived from the master seed and the cell coordinates.
pub fn cell_seed(master: u64, family: &str, d: usize, n: usize) -> u64 {
    derive_seed(
        master,
        &[family.as_bytes(), &(d as u64).to_le_bytes(), &(n as u64).to_le_bytes()],
    )
}

/// Evaluates the three bounds and estimates `W₁` for every cell.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut cells = Vec::new();
    for fam in config.families()? {
        for &d in &config.dims() {
            for &n in &config.model.n {
                cells.push((fam, d, n));
            }
        }
    }
    let est = &config.estimator;
    cells
        .par_iter()
        .map(|&(fam, d, n)| {
            let model = SumModel::iid_standardized(fam, d, n)?;
            let seed = cell_seed(config.seed, fam.name(), d, n);
            let w1 = w1_estimate(&model, est.m, est.replications, seed)?;
            Ok(ResultRow {
                family: fam.name().to_string(),
                d,
                n,
                bound_m1: bound_m1(&model)?.total,
                bound_m2: bound_m2(&model)?.total,
                bound_m3: bound_m3(&model)?.total,
                w1_value: w1.value,
                w1_ci_lo: w1.ci.0,
                w1_ci_hi: w1.ci.1,
                seed,
            })
        })
        .collect()
}

/// Measured empirical-`W₁` floor between two standard normal samples, one
/// per configured dimension, at the configured `m` and replication count.
pub fn sampling_floors(config: &ExperimentConfig) -> Result<Vec<(usize, f64)>> {
    config.validate()?;
    let est = &config.estimator;
    config
        .dims()
        .par_iter()
        .map(|&d| {
            let seed = derive_seed(config.seed, &[b"floor", &(d as u64).to_le_bytes()]);
            Ok((d, sampling_floor(d, est.m, est.replications, seed)?.value))
        })
        .collect()
}

/// Rate-fit summary lines, one per `(family, d)` group. When a floor is
/// known for `d`, the fit uses `n` in increasing order only while
/// `bound_m3 >= 2 * floor`.
pub fn rate_summary(rows: &[ResultRow], floors: &[(usize, f64)]) -> Vec<String> {
    let mut groups: Vec<(String, usize)> = Vec::new();
    for r in rows {
        if !groups.iter().any(|(f, d)| *f == r.family && *d == r.d) {
            groups.push((r.family.clone(), r.d));
        }
    }
    groups
        .into_iter()
        .map(|(family, d)| {
            let mut pts: Vec<&ResultRow> = rows.iter().filter(|r| r.family == family && r.d == d).collect();
            pts.sort_by_key(|r| r.n);
            pts.dedup_by_key(|r| r.n);
            let floor = floors.iter().find(|(fd, _)| *fd == d).map(|(_, f)| *f);
            let total = pts.len();
            if let Some(fl) = floor {
                let keep = pts.iter().take_while(|r| r.bound_m3 >= 2.0 * fl).count();
                pts.truncate(keep);
            }
            let w1: Vec<(f64, f64)> = pts.iter().map(|r| (r.n as f64, r.w1_value)).collect();
            let m3: Vec<(f64, f64)> = pts.iter().map(|r| (r.n as f64, r.bound_m3)).collect();
            let fmt = |r: Result<f64>| r.map_or_else(|_| "NA".to_string(), |s| format!("{s:.6}"));
            let (w1_slope, method) = if w1.len() >= 4 {
                (fmt(rate_fit(&w1)), "rate_fit")
            } else {
                (fmt(log_log_slope(&w1)), "least_squares_lt4_points")
            };
            let floor_txt = floor.map_or_else(|| "NA".to_string(), |f| format!("{f:.6}"));
            format!(
                "# rate family={family} d={d} points={}/{total} floor={floor_txt} w1_slope={w1_slope} bound_m3_slope={} method={method}",
                w1.len(),
                fmt(log_log_slope(&m3)),
            )
        })
        .collect()
}

/// RFC-4180 CSV with a header row and a commented rate-fit footer.
pub fn to_csv(rows: &[ResultRow], floors: &[(usize, f64)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record([
            "family", "d", "n", "bound_m1", "bound_m2", "bound_m3", "w1_value", "w1_ci_lo", "w1_ci_hi", "seed",
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    let mut out = String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?;
    for line in rate_summary(rows, floors) {
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Prints the three bounds for one standardized i.i.d. model as CSV.
pub fn bound_csv(family: &str, d: usize, n: usize, p: Option<f64>) -> Result<String> {
    let fam = Family::parse(family, p)?;
    let model = SumModel::iid_standardized(fam, d, n)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["family", "d", "n", "bound_m1", "bound_m2", "bound_m3"])?;
    w.write_record([
        fam.name().to_string(),
        d.to_string(),
        n.to_string(),
        bound_m1(&model)?.total.to_string(),
        bound_m2(&model)?.total.to_string(),
        bound_m3(&model)?.total.to_string(),
    ])?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The Monte Carlo error is too wide to decide.
    Inconclusive,
}

impl CheckStatus {
    pub fn label(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub status: CheckStatus,
    pub detail: String,
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<12} {:<40} measured={:.4e} threshold={:.4e} {}",
            self.status.label(),
            self.name,
            self.measured,
            self.threshold,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail).collect()
    }

    pub fn inconclusive(&self) -> Vec<&CheckResult> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Inconclusive)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    /// 0 when nothing failed (inconclusive checks are reported, not failed), 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{c}");
        }
        let _ = writeln!(
            s,
            "summary: {} checks, {} failed, {} inconclusive",
            self.checks.len(),
            self.failures().len(),
            self.inconclusive().len()
        );
        s
    }
}

/// Standard errors above these absolute widths make a statistical check inconclusive.
pub const STEIN_RESOLUTION: f64 = 0.05;
pub const ZERO_BIAS_RESOLUTION: f64 = 0.05;
pub const SLEPIAN_RESOLUTION: f64 = 0.01;
/// Pass threshold for statistical checks, in combined standard errors.
pub const Z_THRESHOLD: f64 = 4.0;
pub const CS_TOL: f64 = 1e-10;

fn statistical(name: String, gap: f64, se: f64, resolution: f64) -> CheckResult {
    let z = if gap == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        gap / se
    };
    let status = if se > resolution {
        CheckStatus::Inconclusive
    } else if z <= Z_THRESHOLD {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    CheckResult {
        name,
        measured: z,
        threshold: Z_THRESHOLD,
        status,
        detail: format!("gap={gap:.3e} se={se:.3e} (se resolution {resolution:.0e})"),
    }
}

/// Runs the identity/property battery with the closed-form smoothing constants.
pub fn verify(config: &ExperimentConfig) -> Result<VerifyReport> {
    verify_with(config, &SmoothingConstants::closed_form())
}

/// Runs the battery against the given constants (a corrupted table makes the
/// quadrature check fail).
pub fn verify_with(config: &ExperimentConfig, consts: &SmoothingConstants) -> Result<VerifyReport> {
    let mc_n = config.estimator.mc_n;
    let mut checks = Vec::new();

    for s in 0..4 {
        let quad = constants_c_quadrature(s, 1e-12)?;
        let gap = (quad - consts.get(s)?).abs();
        checks.push(CheckResult {
            name: format!("cs-quadrature[s={s}]"),
            measured: gap,
            threshold: CS_TOL,
            status: if gap <= CS_TOL { CheckStatus::Pass } else { CheckStatus::Fail },
            detail: format!("quadrature={quad:.15} table={:.15}", consts.get(s)?),
        });
    }

    for (k, &d) in config.dims().iter().enumerate() {
        for (j, f) in battery(d).iter().enumerate() {
            let seed = mc::mix_seed(config.seed, (k * 64 + j) as u64);
            let parts = mc::chunked(mc_n, seed, Welford::default, |r, count, acc| {
                let mut z = vec![0.0; d];
                for _ in 0..count {
                    mc::fill_normal(r, &mut z);
                    acc.push(stein_apply(f.as_ref(), &z).unwrap_or(f64::NAN));
                }
            });
            let mut total = Welford::default();
            parts.iter().for_each(|p| total.merge(p));
            let e = total.estimate();
            checks.push(statistical(
                format!("stein-identity[{} d={d}]", f.name()),
                e.mean.abs(),
                e.se,
                STEIN_RESOLUTION,
            ));
        }
    }

    let zb_dims: Vec<usize> = config.dims().into_iter().filter(|&d| d <= 2).collect();
    let zb_dims = if zb_dims.is_empty() { vec![1] } else { zb_dims };
    for (k, fam) in [Family::Rademacher, Family::Uniform, Family::Exponential].iter().enumerate() {
        for &d in &zb_dims {
            let model = SumModel::iid_standardized(*fam, d, 4)?;
            let mix = MuBreveMixture::new(&model, config.seed)?;
            let u = oblique_direction(d);
            for (j, profile) in [Profile::Sin, Profile::LogCosh].iter().enumerate() {
                let f = Ridge::new(u.clone(), *profile);
                let seed = mc::mix_seed(config.seed, 10_000 + (k * 100 + d * 10 + j) as u64);
                let res = verify_zero_bias_identity(&model, &mix, &f, mc_n, seed)?;
                checks.push(statistical(
                    format!("zero-bias[{} n=4 d={d} {}]", fam.name(), f.name()),
                    res.residual,
                    res.se,
                    ZERO_BIAS_RESOLUTION,
                ));
            }
        }
    }

    {
        let model = SumModel::iid_standardized(Family::Rademacher, 1, 10)?;
        let f = Ridge::new(vec![1.0], Profile::Cos);
        let res = slepian_residual(&f, &model, 0.1, 16, mc_n, mc::mix_seed(config.seed, 20_000))?;
        checks.push(statistical(
            "slepian-residual[cos, rademacher n=10]".into(),
            res.residual,
            res.se,
            SLEPIAN_RESOLUTION,
        ));
        // Gaussian W: the residual of a quadratic vanishes identically in law
        let g = crate::function::Quadratic::squared_norm(2);
        let res = slepian_residual(&g, &StandardNormal { dim: 2 }, 0.1, 16, mc_n, mc::mix_seed(config.seed, 20_001))?;
        checks.push(statistical(
            "slepian-residual[sqnorm, gaussian d=2]".into(),
            res.residual,
            res.se,
            SLEPIAN_RESOLUTION,
        ));
    }

    let mut worst = f64::NEG_INFINITY;
    let mut worst_beta = 0.0;
    for k in 0..31 {
        let beta2 = 10f64.powf(-6.0 + 12.0 * k as f64 / 30.0);
        let c = circum_bound_check_with(beta2, consts, ANGLE_QUAD_TOL)?;
        if c.lhs - c.rhs > worst {
            worst = c.lhs - c.rhs;
            worst_beta = beta2;
        }
    }
    checks.push(CheckResult {
        name: "circum[31-point grid]".into(),
        measured: worst,
        threshold: 0.0,
        status: if worst <= 0.0 { CheckStatus::Pass } else { CheckStatus::Fail },
        detail: format!("max lhs-rhs at beta2={worst_beta:.1e}"),
    });

    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: &str = r#"
seed = 7
[model]
family = "rademacher"
d = 1
n = [4, 16]
[estimator]
m = 50
replications = 20
mc_n = 1000
"#;

    #[test]
    fn parse_and_validate() {
        let c = ExperimentConfig::parse(CFG).unwrap();
        assert_eq!(c.dims(), vec![1]);
        assert!(ExperimentConfig::parse("[model]\nfamily='x'\nd=1\nn=[1]").is_err());
        let bad = CFG.replace("rademacher", "cauchy");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(err.to_string().contains("rademacher"), "{err}");
        assert!(ExperimentConfig::parse(&CFG.replace("m = 50", "m = 5")).is_err());
        assert!(ExperimentConfig::parse(&CFG.replace("seed = 7", "seed = 7\nbogus = 1")).is_err());
    }

    #[test]
    fn run_is_deterministic() {
        let c = ExperimentConfig::parse(CFG).unwrap();
        let floors = sampling_floors(&c).unwrap();
        let a = to_csv(&run(&c).unwrap(), &floors).unwrap();
        let b = to_csv(&run(&c).unwrap(), &floors).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("family,d,n,bound_m1"));
        assert!(a.contains("# rate family=rademacher d=1"));
    }

    #[test]
    fn bound_csv_rademacher() {
        let s = bound_csv("rademacher", 1, 100, None).unwrap();
        let line = s.lines().nth(1).unwrap();
        let m3: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((m3 - 0.05).abs() < 1e-12, "{line}");
    }
}
