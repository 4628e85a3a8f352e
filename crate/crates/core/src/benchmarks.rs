//! Test problems, accuracy metrics and experiment runners.

use crate::doe::{grid, lhs};
use crate::error::{Error, Result};
use crate::gp::{fit, FitConfig, GpModel};
use crate::kernels::{hyperparameter_count, CategoricalKernelKind, ExponentPower};
use crate::linalg::Mat;
use crate::scalar::sin_cos;
use crate::space::{Dataset, DesignSpace, MixedPoint, VariableSpec};
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::time::Instant;

// ---------------------------------------------------------------- cosine

/// x ∈ [0, 1] and one categorical variable with 13 levels.
pub fn cosine_space() -> DesignSpace {
    DesignSpace::new(vec![
        VariableSpec::continuous("x", 0.0, 1.0),
        VariableSpec::categorical_count("c", 13),
    ])
    .expect("valid space")
}

/// Levels 1–9 share one phase family, levels 10–13 another:
/// `cos(7π/2·x + 0.4π + πc/15 − c/20)` for c ≤ 9, `cos(7π/2·x − c/20)` otherwise.
pub fn cosine_function(x: f64, c: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfBounds { index: 0, value: x });
    }
    let cf = c as f64;
    match c {
        1..=9 => Ok((3.5 * PI * x + 0.4 * PI + PI * cf / 15.0 - cf / 20.0).cos()),
        10..=13 => Ok((3.5 * PI * x - cf / 20.0).cos()),
        _ => Err(Error::LevelOutOfRange { index: 1, level: c }),
    }
}

fn cosine_at(w: &MixedPoint<f64>) -> f64 {
    cosine_function(w.continuous[0], w.levels[0]).expect("grid and DoE points are in bounds")
}

// ---------------------------------------------------------------- beam

/// Second moment of area about the horizontal centroidal axis of a simple polygon.
fn polygon_area_ix(v: &[(f64, f64)]) -> (f64, f64) {
    let (mut a, mut ix) = (0.0, 0.0);
    for i in 0..v.len() {
        let (x0, y0) = v[i];
        let (x1, y1) = v[(i + 1) % v.len()];
        let cross = x0 * y1 - x1 * y0;
        a += cross;
        ix += cross * (y0 * y0 + y0 * y1 + y1 * y1);
    }
    (a.abs() / 2.0, ix.abs() / 12.0)
}

/// I/A² of a six-pointed star with inner/outer radius ratio 0.5 (centroid at the origin).
fn star_normalized_inertia() -> f64 {
    let v: Vec<(f64, f64)> = (0..12)
        .map(|k| {
            let r = if k % 2 == 0 { 1.0 } else { 0.5 };
            let t = PI / 2.0 + k as f64 * PI / 6.0;
            let (sin, cos) = sin_cos(t);
            (r * cos, r * sin)
        })
        .collect();
    let (a, ix) = polygon_area_ix(&v);
    ix / (a * a)
}

/// I/A² of a unit-size I-beam with the given web and flange thicknesses.
fn ibeam_normalized_inertia(web: f64, flange: f64) -> f64 {
    let inner = 1.0 - 2.0 * flange;
    let a = 2.0 * flange + web * inner;
    let i = (1.0 - (1.0 - web) * inner.powi(3)) / 12.0;
    i / (a * a)
}

/// I/A² of a shape with a concentric hole scaled by `q`: Ĩ₀ (1 + q²) / (1 − q²).
fn hollowed(full: f64, q: f64) -> f64 {
    full * (1.0 + q * q) / (1.0 - q * q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CantileverConfig {
    /// Tip load F in N.
    pub force: f64,
    /// Young modulus E in Pa.
    pub young_modulus: f64,
    /// Normalized moment of inertia Ĩ = I/S² per cross-section level.
    pub i_tilde: Vec<f64>,
}

impl Default for CantileverConfig {
    /// F = 50 kN, E = 200 GPa, and Ĩ for shapes [star, I-beam, circle,
    /// square] × thickness [full, thick, hollow]; level = 3·shape + thickness + 1,
    /// so levels {1,4,7,10}, {2,5,8,11}, {3,6,9,12} share a thickness.
    fn default() -> Self {
        let star = star_normalized_inertia();
        let circle = 1.0 / (4.0 * PI);
        let square = 1.0 / 12.0;
        Self {
            force: 50e3,
            young_modulus: 200e9,
            i_tilde: vec![
                star,
                hollowed(star, 0.32),
                hollowed(star, 0.56),
                ibeam_normalized_inertia(0.48, 0.32),
                ibeam_normalized_inertia(0.38, 0.25),
                ibeam_normalized_inertia(0.28, 0.18),
                circle,
                hollowed(circle, 0.34),
                hollowed(circle, 0.66),
                square,
                hollowed(square, 0.5),
                hollowed(square, 0.7),
            ],
        }
    }
}

impl CantileverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.i_tilde.len() != 12 {
            return Err(Error::InvalidSpec(format!("need 12 Ĩ values, got {}", self.i_tilde.len())));
        }
        if !(self.force > 0.0 && self.young_modulus > 0.0) || self.i_tilde.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidSpec("F, E and every Ĩ must be positive".into()));
        }
        Ok(())
    }
}

/// Length L ∈ [10, 20] m, section area S ∈ [1, 2] m², cross-section (12 levels).
pub fn cantilever_space() -> DesignSpace {
    DesignSpace::new(vec![
        VariableSpec::continuous("L", 10.0, 20.0),
        VariableSpec::continuous("S", 1.0, 2.0),
        VariableSpec::categorical_count("section", 12),
    ])
    .expect("valid space")
}

/// Tip deflection δ = F L³ / (3 E S² Ĩ) in meters.
pub fn cantilever_deflection(cfg: &CantileverConfig, level: usize, length: f64, area: f64) -> Result<f64> {
    if !(10.0..=20.0).contains(&length) {
        return Err(Error::OutOfBounds { index: 0, value: length });
    }
    if !(1.0..=2.0).contains(&area) {
        return Err(Error::OutOfBounds { index: 1, value: area });
    }
    let it = *cfg
        .i_tilde
        .get(level.wrapping_sub(1))
        .ok_or(Error::LevelOutOfRange { index: 2, level })?;
    Ok(cfg.force * length.powi(3) / (3.0 * cfg.young_modulus * area * area * it))
}

// ---------------------------------------------------------------- metrics

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    if a == 0 {
        return Err(Error::InvalidSpec("metrics need at least one value".into()));
    }
    Ok(())
}

/// sqrt(mean squared error).
pub fn rmse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    check_lengths(predictions.len(), truths.len())?;
    let se: f64 = predictions.iter().zip(truths).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((se / predictions.len() as f64).sqrt())
}

/// sqrt(sum of squared errors), the whole-grid error customarily reported.
pub fn total_error(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    check_lengths(predictions.len(), truths.len())?;
    Ok(predictions.iter().zip(truths).map(|(p, t)| (p - t) * (p - t)).sum::<f64>().sqrt())
}

/// log(mean of squared error / variance).
pub fn pva(predictions: &[f64], variances: &[f64], truths: &[f64]) -> Result<f64> {
    check_lengths(predictions.len(), truths.len())?;
    check_lengths(predictions.len(), variances.len())?;
    let s: f64 = predictions
        .iter()
        .zip(truths)
        .zip(variances)
        .map(|((p, t), v)| (p - t) * (p - t) / v)
        .sum();
    Ok((s / predictions.len() as f64).ln())
}

// ---------------------------------------------------------------- runners

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkResult {
    pub kind: CategoricalKernelKind,
    pub p: ExponentPower,
    pub n_hyper: usize,
    pub seed: u64,
    pub doe_size: usize,
    /// RMSE on the validation grid, in output units.
    pub rmse: f64,
    /// sqrt(Σ err²) over the validation grid, in output units.
    pub total_error: f64,
    pub pva: f64,
    pub log_likelihood: f64,
    pub fit_seconds: f64,
    /// R_1 of the fitted model.
    pub correlation: Mat<f64>,
}

/// One kernel's outcome; a failed fit does not stop the other kinds.
#[derive(Debug)]
pub struct KindOutcome {
    pub kind: CategoricalKernelKind,
    pub result: Result<BenchmarkResult>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkSettings {
    pub p: ExponentPower,
    pub fit: FitConfig,
}

impl Default for BenchmarkSettings {
    fn default() -> Self {
        Self {
            p: ExponentPower::Squared,
            fit: FitConfig::default(),
        }
    }
}

fn evaluate(
    kind: CategoricalKernelKind,
    train: &Dataset<f64>,
    validation: &[MixedPoint<f64>],
    truths: &[f64],
    seed: u64,
    settings: &BenchmarkSettings,
) -> Result<BenchmarkResult> {
    let start = Instant::now();
    let model: GpModel<f64> = fit(train, kind, settings.p, &settings.fit)?;
    let fit_seconds = start.elapsed().as_secs_f64();
    let preds = model.predict_batch(validation)?;
    let floor = 1e-12 * model.sigma2_hat();
    let means: Vec<f64> = preds.iter().map(|p| p.0).collect();
    let vars: Vec<f64> = preds.iter().map(|p| p.1.max(floor)).collect();
    Ok(BenchmarkResult {
        kind,
        p: settings.p,
        n_hyper: hyperparameter_count(train.space(), kind),
        seed,
        doe_size: train.len(),
        rmse: rmse(&means, truths)?,
        total_error: total_error(&means, truths)?,
        pva: pva(&means, &vars, truths)?,
        log_likelihood: model.log_likelihood(),
        fit_seconds,
        correlation: model.categorical_matrices()[0].clone(),
    })
}

fn run(
    space: DesignSpace,
    f: impl Fn(&MixedPoint<f64>) -> f64,
    grid_counts: &[usize],
    kinds: &[CategoricalKernelKind],
    doe_size: usize,
    seed: u64,
    settings: &BenchmarkSettings,
) -> Result<Vec<KindOutcome>> {
    let points = lhs(&space, doe_size, seed)?;
    let train = Dataset::from_fn(space.clone(), points, &f)?;
    let validation = grid(&space, grid_counts)?;
    let truths: Vec<f64> = validation.iter().map(&f).collect();
    Ok(kinds
        .iter()
        .map(|&kind| KindOutcome {
            kind,
            result: evaluate(kind, &train, &validation, &truths, seed, settings),
        })
        .collect())
}

/// Fits each kind on an LHS of `doe_size` points and validates on the
/// 1000 × 13 grid.
pub fn run_cosine_benchmark(
    kinds: &[CategoricalKernelKind],
    doe_size: usize,
    seed: u64,
    settings: &BenchmarkSettings,
) -> Result<Vec<KindOutcome>> {
    run(cosine_space(), cosine_at, &[1000], kinds, doe_size, seed, settings)
}

/// Fits each kind on an LHS of `doe_size` points and validates on the
/// 30 × 30 × 12 grid. Errors are in meters.
pub fn run_cantilever_benchmark(
    kinds: &[CategoricalKernelKind],
    doe_size: usize,
    seed: u64,
    cfg: &CantileverConfig,
    settings: &BenchmarkSettings,
) -> Result<Vec<KindOutcome>> {
    cfg.validate()?;
    let f = |w: &MixedPoint<f64>| {
        cantilever_deflection(cfg, w.levels[0], w.continuous[0], w.continuous[1]).expect("points are in bounds")
    };
    run(cantilever_space(), f, &[30, 30], kinds, doe_size, seed, settings)
}

/// Writes one CSV row per outcome. `unit_scale` multiplies the error columns
/// (100 turns meters into centimeters).
pub fn write_report<W: Write>(out: W, problem: &str, outcomes: &[KindOutcome], unit_scale: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "problem",
        "kernel",
        "p",
        "n_hyper",
        "seed",
        "doe_size",
        "rmse",
        "total_error",
        "pva",
        "log_likelihood",
        "fit_seconds",
        "status",
    ])?;
    for o in outcomes {
        match &o.result {
            Ok(r) => w.write_record([
                problem.to_string(),
                r.kind.to_string(),
                r.p.value().to_string(),
                r.n_hyper.to_string(),
                r.seed.to_string(),
                r.doe_size.to_string(),
                format!("{:.6}", r.rmse * unit_scale),
                format!("{:.6}", r.total_error * unit_scale),
                format!("{:.4}", r.pva),
                format!("{:.4}", r.log_likelihood),
                format!("{:.3}", r.fit_seconds),
                "ok".to_string(),
            ])?,
            Err(e) => {
                let mut row = vec![problem.to_string(), o.kind.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 9));
                row.push(format!("error: {e}"));
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes an L × L matrix as CSV with level names on both axes.
pub fn write_correlation<W: Write>(out: W, matrix: &Mat<f64>, level_names: &[String]) -> Result<()> {
    if matrix.rows() != level_names.len() || !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: level_names.len(),
            found: matrix.rows(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["level".to_string()];
    header.extend(level_names.iter().cloned());
    w.write_record(&header)?;
    for (i, name) in level_names.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend(matrix.row(i).iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- aircraft audit

/// Ten continuous design variables, a 9-level propulsion architecture and a
/// 2-level turboshaft layout.
pub fn dragon_space() -> DesignSpace {
    let c = VariableSpec::continuous;
    DesignSpace::new(vec![
        c("fan_operating_pressure_ratio", 1.05, 1.3),
        c("wing_aspect_ratio", 8.0, 12.0),
        c("wing_sweep_deg", 15.0, 40.0),
        c("wing_taper_ratio", 0.2, 0.5),
        c("ht_aspect_ratio", 3.0, 6.0),
        c("ht_sweep_deg", 20.0, 40.0),
        c("ht_taper_ratio", 0.3, 0.5),
        c("tofl_m", 1800.0, 2500.0),
        c("toc_vertical_speed_ft_min", 300.0, 800.0),
        c("climb_slope_rad", 0.075, 0.15),
        VariableSpec::categorical_count("architecture", 9),
        VariableSpec::categorical_count("turboshaft_layout", 2),
    ])
    .expect("valid space")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DragonAudit {
    pub n_continuous: usize,
    pub n_categorical: usize,
    pub relaxed: usize,
    pub gd: usize,
    pub cr: usize,
    pub ehh: usize,
}

impl DragonAudit {
    pub const EXPECTED: DragonAudit = DragonAudit {
        n_continuous: 10,
        n_categorical: 2,
        relaxed: 21,
        gd: 12,
        cr: 21,
        ehh: 47,
    };
}

impl fmt::Display for DragonAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "relaxed={} gd={} cr={} ehh={}", self.relaxed, self.gd, self.cr, self.ehh)
    }
}

/// Counts for the aircraft space; errors if they differ from [`DragonAudit::EXPECTED`].
pub fn dragon_space_audit() -> Result<DragonAudit> {
    let s = dragon_space();
    let audit = DragonAudit {
        n_continuous: s.n_continuous(),
        n_categorical: s.n_categorical(),
        relaxed: s.relaxed_dim(),
        gd: hyperparameter_count(&s, CategoricalKernelKind::Gd),
        cr: hyperparameter_count(&s, CategoricalKernelKind::Cr),
        ehh: hyperparameter_count(&s, CategoricalKernelKind::Ehh),
    };
    if audit != DragonAudit::EXPECTED {
        return Err(Error::InvalidSpec(format!("aircraft space audit mismatch: {audit}")));
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cosine_examples() {
        assert_relative_eq!(cosine_function(0.0, 10).unwrap(), 0.877_582_561_890_372_8, epsilon = 1e-15);
        assert_relative_eq!(cosine_function(0.0, 13).unwrap(), (-0.65f64).cos(), epsilon = 1e-15);
        assert!((cosine_function(0.0, 13).unwrap() - 0.796_084).abs() < 1e-6);
        assert!(cosine_function(0.5, 0).is_err());
        assert!(cosine_function(0.5, 14).is_err());
        assert!(cosine_function(1.5, 3).is_err());
    }

    #[test]
    fn cantilever_examples() {
        let cfg = CantileverConfig {
            i_tilde: vec![1.0; 12],
            ..CantileverConfig::default()
        };
        assert_relative_eq!(cantilever_deflection(&cfg, 1, 10.0, 1.0).unwrap(), 5e7 / 6e11, max_relative = 1e-14);
        let d = cantilever_deflection(&cfg, 3, 10.0, 1.0).unwrap();
        assert_relative_eq!(cantilever_deflection(&cfg, 3, 10.0, 2.0).unwrap(), d / 4.0, max_relative = 1e-14);
        assert_relative_eq!(cantilever_deflection(&cfg, 3, 20.0, 1.0).unwrap(), d * 8.0, max_relative = 1e-14);
        assert!(cantilever_deflection(&cfg, 13, 10.0, 1.0).is_err());
        assert!(cantilever_deflection(&cfg, 1, 9.0, 1.0).is_err());
    }

    #[test]
    fn default_inertias() {
        let cfg = CantileverConfig::default();
        cfg.validate().unwrap();
        let it = &cfg.i_tilde;
        assert_relative_eq!(it[3], 0.123_08, epsilon = 1e-5);
        assert_relative_eq!(it[4], 0.161_47, epsilon = 1e-5);
        assert_relative_eq!(it[5], 0.232_53, epsilon = 1e-5);
        assert_relative_eq!(it[6], 1.0 / (4.0 * PI), epsilon = 1e-15);
        // thinner walls carry more inertia per unit area squared
        for shape in 0..4 {
            assert!(it[3 * shape] < it[3 * shape + 1] && it[3 * shape + 1] < it[3 * shape + 2]);
        }
        // polygon formula on a unit square: 1/12
        let (a, ix) = polygon_area_ix(&[(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]);
        assert_relative_eq!(a, 1.0);
        assert_relative_eq!(ix, 1.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn metric_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[1.0, 1.0], &[0.0, 2.0]).unwrap(), 1.0);
        assert_eq!(rmse(&[3.0], &[1.0]).unwrap(), 2.0);
        assert_eq!(total_error(&[1.0, 1.0], &[0.0, 2.0]).unwrap(), 2f64.sqrt());
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert_eq!(pva(&[1.0, 2.0], &[1.0, 4.0], &[0.0, 0.0]).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert_relative_eq!(pva(&[1.0], &[1.0 / e], &[0.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(pva(&[1.0, 3.0], &[1.0, 3.0], &[0.0, 0.0]).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert!(pva(&[1.0], &[1.0, 1.0], &[0.0]).is_err());
    }

    #[test]
    fn dragon_counts() {
        let a = dragon_space_audit().unwrap();
        assert_eq!(a.to_string(), "relaxed=21 gd=12 cr=21 ehh=47");
        assert_eq!(a.n_categorical, 2);
    }

    #[test]
    fn tiny_doe_still_fits() {
        let settings = BenchmarkSettings {
            fit: FitConfig {
                n_starts: 2,
                max_evals: Some(200),
                ..FitConfig::default()
            },
            ..BenchmarkSettings::default()
        };
        let kinds = [CategoricalKernelKind::Gd, CategoricalKernelKind::Cr, CategoricalKernelKind::Ehh];
        let out = run_cosine_benchmark(&kinds, 5, 1, &settings).unwrap();
        assert_eq!(out.len(), 3);
        for (o, want) in out.iter().zip([2, 14, 79]) {
            let r = o.result.as_ref().unwrap();
            assert_eq!(r.n_hyper, want);
            assert!(r.rmse >= 0.0);
        }
        let mut buf = Vec::new();
        write_report(&mut buf, "cosine", &out, 1.0).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }
}
