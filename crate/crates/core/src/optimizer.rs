//! Bound-constrained derivative-free maximization.
//!
//! [`local_search`] is a linear-model trust-region method in the COBYLA
//! family: it keeps a simplex of n + 1 evaluated points, fits the linear
//! interpolant, steps to the model minimizer inside the trust region and the
//! box, and halves the trust radius when the model stops predicting
//! progress on a well-poised simplex. Coordinates are scaled to the unit box
//! so step sizes are fractions of the box width.
//!
//! [`multistart`] runs it from starts spread evenly along the box diagonal.

use crate::error::{Error, Result};
use crate::linalg::{dot, invert, Mat};
use crate::scalar::Scalar;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;

#[derive(Clone, Debug, PartialEq)]
pub struct BoxBounds<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> BoxBounds<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if let Some(j) = (0..lower.len()).find(|&j| !(lower[j] < upper[j]) || !lower[j].is_finite() || !upper[j].is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "bound {j}: need finite lower < upper, got [{}, {}]",
                lower[j], upper[j]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The box [lo, hi]^dim.
    pub fn uniform(dim: usize, lo: T, hi: T) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| v >= l && v <= u)
    }

    /// Point at fraction `f` of every coordinate range.
    pub fn along_diagonal(&self, f: T) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| (l + f * (u - l)).max(l).min(u))
            .collect()
    }

    fn to_unit(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .map(|((&v, &l), &u)| ((v - l) / (u - l)).max(T::zero()).min(T::one()))
            .collect()
    }

    fn unit_to_box(&self, u: &[T]) -> Vec<T> {
        u.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .map(|((&v, &l), &h)| (l + v * (h - l)).max(l).min(h))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Initial trust radius as a fraction of the box width.
    pub initial_step: f64,
    /// Final trust radius as a fraction of the box width.
    pub final_step: f64,
    /// Evaluation budget per start; `None` means 500 · dim.
    pub max_evals: Option<usize>,
    /// Start layout seed for [`multistart`]; 0 keeps every start on the diagonal.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            final_step: 1e-6,
            max_evals: None,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.final_step > 0.0 && self.final_step < self.initial_step && self.initial_step <= 0.5) {
            return Err(Error::InvalidSpec(format!(
                "need 0 < final_step ({}) < initial_step ({}) <= 0.5",
                self.final_step, self.initial_step
            )));
        }
        if self.max_evals == Some(0) {
            return Err(Error::InvalidSpec("max_evals must be positive".into()));
        }
        Ok(())
    }

    pub fn budget(&self, dim: usize) -> usize {
        self.max_evals.unwrap_or(500 * dim.max(1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalResult<T> {
    pub point: Vec<T>,
    pub value: T,
    pub n_evals: usize,
    /// Best value seen after each evaluation.
    pub trace: Vec<T>,
}

/// Outcome of one multistart run.
#[derive(Clone, Debug, PartialEq)]
pub struct StartLog {
    pub index: usize,
    pub n_evals: usize,
    pub best_value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultistartResult<T> {
    pub point: Vec<T>,
    pub value: T,
    pub starts: Vec<StartLog>,
}

/// Writes the per-start log as CSV: `start,evals,best`.
pub fn write_trace_log<W: Write>(out: W, starts: &[StartLog]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["start", "evals", "best"])?;
    for s in starts {
        let best = match (&s.best_value, &s.error) {
            (Some(v), _) => format!("{v:?}"),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => String::new(),
        };
        w.write_record([s.index.to_string(), s.n_evals.to_string(), best])?;
    }
    w.flush()?;
    Ok(())
}

/// Evaluation bookkeeping in unit coordinates; minimizes `-objective`.
struct Evaluator<'a, T, F> {
    objective: F,
    bounds: &'a BoxBounds<T>,
    budget: usize,
    n_evals: usize,
    best_point: Vec<T>,
    best_value: T,
    trace: Vec<T>,
}

impl<T: Scalar, F: FnMut(&[T]) -> Result<T>> Evaluator<'_, T, F> {
    fn exhausted(&self) -> bool {
        self.n_evals >= self.budget
    }

    /// Returns the minimization value at unit point `u`.
    fn eval(&mut self, u: &[T]) -> Result<T> {
        let x = self.bounds.unit_to_box(u);
        self.eval_at(x)
    }

    fn eval_at(&mut self, x: Vec<T>) -> Result<T> {
        let v = (self.objective)(&x).map_err(|e| Error::ObjectiveFailure {
            point: x.iter().map(|v| v.to_f64_lossy()).collect(),
            source: Box::new(e),
        })?;
        self.n_evals += 1;
        let v = if v.is_nan() { T::neg_infinity() } else { v };
        if v > self.best_value || self.trace.is_empty() {
            self.best_value = v;
            self.best_point = x;
        }
        self.trace.push(self.best_value);
        Ok(-v)
    }
}

/// Minimizer of `g·d` over `|d| ≤ radius` with `0 ≤ x + d ≤ 1`.
fn box_trust_step<T: Scalar>(g: &[T], x: &[T], radius: T) -> Vec<T> {
    let n = g.len();
    let mut d = vec![T::zero(); n];
    let mut free: Vec<bool> = (0..n)
        .map(|i| {
            // a coordinate on a bound whose descent direction leaves the box is fixed at 0
            !((x[i] <= T::zero() && g[i] > T::zero()) || (x[i] >= T::one() && g[i] < T::zero()))
        })
        .collect();
    loop {
        let fixed_sq: T = (0..n).filter(|&i| !free[i]).map(|i| d[i] * d[i]).sum();
        let rem = (radius * radius - fixed_sq).max(T::zero()).sqrt();
        let gnorm = (0..n).filter(|&i| free[i]).map(|i| g[i] * g[i]).sum::<T>().sqrt();
        if gnorm == T::zero() || rem == T::zero() {
            for i in 0..n {
                if free[i] {
                    d[i] = T::zero();
                }
            }
            return d;
        }
        let mut clipped = false;
        for i in 0..n {
            if !free[i] {
                continue;
            }
            let di = -rem * g[i] / gnorm;
            if x[i] + di < T::zero() {
                d[i] = -x[i];
                free[i] = false;
                clipped = true;
            } else if x[i] + di > T::one() {
                d[i] = T::one() - x[i];
                free[i] = false;
                clipped = true;
            } else {
                d[i] = di;
            }
        }
        if !clipped {
            return d;
        }
    }
}

fn norm<T: Scalar>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

fn add_clamped<T: Scalar>(x: &[T], d: &[T]) -> Vec<T> {
    x.iter().zip(d).map(|(&a, &b)| (a + b).max(T::zero()).min(T::one())).collect()
}

/// Maximizes `objective` over `bounds` from `start`.
///
/// The returned point is exactly inside the box and its value is at least
/// the value at `start`.
pub fn local_search<T, F>(objective: F, bounds: &BoxBounds<T>, start: &[T], config: &SearchConfig) -> Result<LocalResult<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<T>,
{
    config.validate()?;
    if start.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            found: start.len(),
        });
    }
    if !bounds.contains(start) {
        return Err(Error::InvalidSpec("start point outside the bounds".into()));
    }
    let n = bounds.dim();
    let mut ev = Evaluator {
        objective,
        bounds,
        budget: config.budget(n),
        n_evals: 0,
        best_point: start.to_vec(),
        best_value: T::neg_infinity(),
        trace: Vec::new(),
    };
    let mut base = bounds.to_unit(start);
    // the start itself is evaluated unrounded so a flat objective returns it verbatim
    let mut f0 = ev.eval_at(start.to_vec())?;
    if n > 0 {
        minimize_unit(&mut ev, &mut base, &mut f0, config)?;
    }
    Ok(LocalResult {
        point: ev.best_point,
        value: ev.best_value,
        n_evals: ev.n_evals,
        trace: ev.trace,
    })
}

/// Simplex state: displacement rows `disp[j]` from `base`, values `fv[j]`,
/// and `inv`, the inverse of the displacement matrix (columns a_j with d_i·a_j = δ_ij).
struct Simplex<T> {
    disp: Mat<T>,
    fv: Vec<T>,
    inv: Mat<T>,
}

fn build_simplex<T, F>(ev: &mut Evaluator<'_, T, F>, base: &[T], rho: T) -> Result<Option<Simplex<T>>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<T>,
{
    let n = base.len();
    let mut disp = Mat::zeros(n, n);
    let mut fv = Vec::with_capacity(n);
    for j in 0..n {
        if ev.exhausted() {
            return Ok(None);
        }
        let step = if base[j] + rho <= T::one() { rho } else { -rho };
        disp[(j, j)] = step;
        let mut v = base.to_vec();
        v[j] += step;
        fv.push(ev.eval(&v)?);
    }
    let inv = Mat::from_fn(n, n, |i, j| if i == j { T::one() / disp[(i, i)] } else { T::zero() });
    Ok(Some(Simplex { disp, fv, inv }))
}

fn minimize_unit<T, F>(ev: &mut Evaluator<'_, T, F>, base: &mut [T], f0: &mut T, config: &SearchConfig) -> Result<()>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<T>,
{
    let n = base.len();
    let rho_end = T::c(config.final_step);
    let mut rho = T::c(config.initial_step);
    let tenth = T::c(0.1);
    let mut simplex = match build_simplex(ev, base, rho)? {
        Some(s) => s,
        None => return Ok(()),
    };

    while !ev.exhausted() {
        // Move the base to the best vertex. Rows become d_k − d_j and −d_j,
        // i.e. D' = E D with E an involution, so D'^-1 = D^-1 E.
        let (jmin, fmin) = simplex
            .fv
            .iter()
            .copied()
            .enumerate()
            .fold((usize::MAX, *f0), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
        if jmin != usize::MAX {
            let dj: Vec<T> = simplex.disp.row(jmin).to_vec();
            for (b, d) in base.iter_mut().zip(&dj) {
                *b = (*b + *d).max(T::zero()).min(T::one());
            }
            for k in 0..n {
                for (i, &d) in dj.iter().enumerate() {
                    simplex.disp[(k, i)] = if k == jmin { -d } else { simplex.disp[(k, i)] - d };
                }
            }
            simplex.fv[jmin] = *f0;
            *f0 = fmin;
            for i in 0..n {
                let s: T = (0..n).map(|k| simplex.inv[(i, k)]).sum();
                simplex.inv[(i, jmin)] = -s;
            }
        }

        // Linear model gradient.
        let df: Vec<T> = simplex.fv.iter().map(|&v| v - *f0).collect();
        let grad = simplex.inv.matvec(&df);
        if grad.iter().any(|g| !g.is_finite()) {
            match rebuild(ev, base, rho)? {
                Some(s) => simplex = s,
                None => break,
            }
            continue;
        }

        let step = box_trust_step(&grad, base, rho);
        let step_len = norm(&step);
        let mut model_failed = true;
        if step_len >= T::c(0.5) * rho {
            let trial = add_clamped(base, &step);
            let d: Vec<T> = trial.iter().zip(base.iter()).map(|(&a, &b)| a - b).collect();
            let fnew = ev.eval(&trial)?;
            let pred = -dot(&grad, &d);
            let ratio = if pred > T::zero() { (*f0 - fnew) / pred } else { -T::one() };
            replace_vertex(&mut simplex, &d, fnew, rho);
            model_failed = !(ratio >= tenth || fnew < *f0);
        }
        if !model_failed {
            continue;
        }
        if ev.exhausted() {
            break;
        }

        // The model failed: fix a badly placed vertex, otherwise shrink.
        if let Some(j) = worst_vertex(&simplex, rho) {
            let a: Vec<T> = (0..n).map(|i| simplex.inv[(i, j)]).collect();
            let an = norm(&a);
            if !(an > T::zero()) || !an.is_finite() {
                match rebuild(ev, base, rho)? {
                    Some(s) => simplex = s,
                    None => break,
                }
                continue;
            }
            let dir: Vec<T> = a.iter().map(|&v| v * rho / an).collect();
            let neg: Vec<T> = dir.iter().map(|&v| -v).collect();
            let plus = add_clamped(base, &dir);
            let minus = add_clamped(base, &neg);
            let len_p = norm(&plus.iter().zip(base.iter()).map(|(&a, &b)| a - b).collect::<Vec<_>>());
            let len_m = norm(&minus.iter().zip(base.iter()).map(|(&a, &b)| a - b).collect::<Vec<_>>());
            // Prefer the side that stays further from the box walls, then the lower model value.
            let choose_plus = if (len_p - len_m).abs() > T::c(1e-3) * rho {
                len_p > len_m
            } else {
                dot(&grad, &dir) <= T::zero()
            };
            let trial = if choose_plus { plus } else { minus };
            let d: Vec<T> = trial.iter().zip(base.iter()).map(|(&a, &b)| a - b).collect();
            let fnew = ev.eval(&trial)?;
            if !set_vertex(&mut simplex, j, &d, fnew) {
                match rebuild(ev, base, rho)? {
                    Some(s) => simplex = s,
                    None => break,
                }
            }
            continue;
        }
        if rho <= rho_end {
            break;
        }
        rho = if rho <= T::c(1.5) * rho_end { rho_end } else { (rho * T::c(0.5)).max(rho_end) };
        // refresh the inverse from scratch to shed accumulated rounding
        match invert(&simplex.disp) {
            Some(inv) => simplex.inv = inv,
            None => match rebuild(ev, base, rho)? {
                Some(s) => simplex = s,
                None => break,
            },
        }
    }
    Ok(())
}

fn rebuild<T, F>(ev: &mut Evaluator<'_, T, F>, base: &[T], rho: T) -> Result<Option<Simplex<T>>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<T>,
{
    build_simplex(ev, base, rho)
}

/// A vertex spoiling the simplex geometry: too far from the base, or too
/// close to the face spanned by the others.
fn worst_vertex<T: Scalar>(s: &Simplex<T>, rho: T) -> Option<usize> {
    let n = s.fv.len();
    let far = T::c(2.0) * rho;
    let (mut jfar, mut dfar) = (None, far);
    for j in 0..n {
        let dj = norm(s.disp.row(j));
        if dj > dfar {
            dfar = dj;
            jfar = Some(j);
        }
    }
    if jfar.is_some() {
        return jfar;
    }
    // distance of vertex j from the opposite face is 1 / |a_j|
    let flat = T::c(0.25) * rho;
    let (mut jflat, mut dmin) = (None, flat);
    for j in 0..n {
        let an = (0..n).map(|i| s.inv[(i, j)] * s.inv[(i, j)]).sum::<T>().sqrt();
        let dist = T::one() / an;
        if !(dist >= dmin) {
            dmin = if dist.is_nan() { T::zero() } else { dist };
            jflat = Some(j);
        }
    }
    jflat
}

/// Puts displacement `d` in the vertex whose replacement keeps the simplex
/// volume largest, weighted toward distant vertices.
fn replace_vertex<T: Scalar>(s: &mut Simplex<T>, d: &[T], fnew: T, rho: T) {
    let n = s.fv.len();
    let mut best = (0, T::neg_infinity());
    for j in 0..n {
        let a_dot: T = (0..n).map(|i| d[i] * s.inv[(i, j)]).sum();
        let dist = norm(s.disp.row(j)) / rho;
        let w = if dist > T::one() { dist * dist } else { T::one() };
        let score = a_dot.abs() * w;
        if score > best.1 {
            best = (j, score);
        }
    }
    // a degenerate replacement keeps the old simplex; the evaluator has
    // already recorded the point if it was the best so far
    set_vertex(s, best.0, d, fnew);
}

/// Replaces row j of the displacement matrix and updates the inverse.
/// Returns false if the replacement would make the simplex degenerate.
fn set_vertex<T: Scalar>(s: &mut Simplex<T>, j: usize, d: &[T], fnew: T) -> bool {
    let n = s.fv.len();
    let aj: Vec<T> = (0..n).map(|i| s.inv[(i, j)]).collect();
    let pivot = dot(d, &aj);
    if !(pivot.abs() > T::c(1e-12)) || !pivot.is_finite() {
        return false;
    }
    let new_aj: Vec<T> = aj.iter().map(|&v| v / pivot).collect();
    for k in 0..n {
        if k == j {
            continue;
        }
        let c: T = (0..n).map(|i| d[i] * s.inv[(i, k)]).sum();
        if c != T::zero() {
            for (i, &a) in new_aj.iter().enumerate() {
                s.inv[(i, k)] -= c * a;
            }
        }
    }
    for i in 0..n {
        s.inv[(i, j)] = new_aj[i];
        s.disp[(j, i)] = d[i];
    }
    s.fv[j] = fnew;
    true
}

/// Start points at fractions (i + ½)/n of each coordinate range.
///
/// With seed 0 all coordinates share the fraction, so the starts lie on the
/// box diagonal; other seeds permute the fractions independently per
/// coordinate (coordinate 0 is never permuted).
pub fn start_points<T: Scalar>(bounds: &BoxBounds<T>, n_starts: usize, seed: u64) -> Vec<Vec<T>> {
    let fractions: Vec<T> = (0..n_starts)
        .map(|i| T::c((i as f64 + 0.5) / n_starts as f64))
        .collect();
    if seed == 0 {
        return fractions.iter().map(|&f| bounds.along_diagonal(f)).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = bounds.dim();
    let perms: Vec<Vec<usize>> = (0..d)
        .map(|j| {
            let mut p: Vec<usize> = (0..n_starts).collect();
            if j > 0 {
                p.shuffle(&mut rng);
            }
            p
        })
        .collect();
    (0..n_starts)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let (l, u) = (bounds.lower[j], bounds.upper[j]);
                    (l + fractions[perms[j][i]] * (u - l)).max(l).min(u)
                })
                .collect()
        })
        .collect()
}

/// Runs [`local_search`] from each of [`start_points`] and keeps the best.
///
/// Fails only if every start fails. Ties go to the lowest start index.
pub fn multistart<T, F>(objective: F, bounds: &BoxBounds<T>, n_starts: usize, config: &SearchConfig) -> Result<MultistartResult<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    if n_starts == 0 {
        return Err(Error::InvalidSpec("n_starts must be at least 1".into()));
    }
    config.validate()?;
    let starts = start_points(bounds, n_starts, config.seed);
    let runs: Vec<Result<LocalResult<T>>> = starts
        .par_iter()
        .map(|s| local_search(|x: &[T]| objective(x), bounds, s, config))
        .collect();
    let mut logs = Vec::with_capacity(n_starts);
    let mut best: Option<(Vec<T>, T)> = None;
    for (index, run) in runs.into_iter().enumerate() {
        match run {
            Ok(r) => {
                logs.push(StartLog {
                    index,
                    n_evals: r.n_evals,
                    best_value: Some(r.value.to_f64_lossy()),
                    error: None,
                });
                if best.as_ref().is_none_or(|(_, v)| r.value > *v) {
                    best = Some((r.point, r.value));
                }
            }
            Err(e) => logs.push(StartLog {
                index,
                n_evals: 0,
                best_value: None,
                error: Some(e.to_string()),
            }),
        }
    }
    match best {
        Some((point, value)) => Ok(MultistartResult {
            point,
            value,
            starts: logs,
        }),
        None => Err(Error::AllStartsFailed(n_starts)),
    }
}
