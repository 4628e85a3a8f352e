//! Mixed design spaces, points, datasets and their file formats.
//!
//! A [`DesignSpace`] is an ordered list of variables. Points keep their
//! coordinates grouped by kind (continuous, integer, categorical) in the
//! order the variables appear. Categorical levels are 1-based, as in the
//! files; [`MixedPoint::level_index`] is the only place they become 0-based.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

/// Tolerance when checking that an integer coordinate is integral.
const INTEGRAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VariableSpec {
    Continuous {
        #[serde(default)]
        name: String,
        lower: f64,
        upper: f64,
    },
    Integer {
        #[serde(default)]
        name: String,
        lower: i64,
        upper: i64,
    },
    Categorical {
        #[serde(default)]
        name: String,
        levels: Vec<String>,
    },
}

impl VariableSpec {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        VariableSpec::Continuous {
            name: name.into(),
            lower,
            upper,
        }
    }

    pub fn integer(name: impl Into<String>, lower: i64, upper: i64) -> Self {
        VariableSpec::Integer {
            name: name.into(),
            lower,
            upper,
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, levels: impl IntoIterator<Item = S>) -> Self {
        VariableSpec::Categorical {
            name: name.into(),
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }

    /// Categorical variable with levels named "1".."count".
    pub fn categorical_count(name: impl Into<String>, count: usize) -> Self {
        Self::categorical(name, (1..=count).map(|k| k.to_string()))
    }

    pub fn name(&self) -> &str {
        match self {
            VariableSpec::Continuous { name, .. }
            | VariableSpec::Integer { name, .. }
            | VariableSpec::Categorical { name, .. } => name,
        }
    }

    /// Number of levels of a categorical variable.
    pub fn level_count(&self) -> Option<usize> {
        match self {
            VariableSpec::Categorical { levels, .. } => Some(levels.len()),
            _ => None,
        }
    }

    /// Bounds of a continuous or integer variable as reals.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            VariableSpec::Continuous { lower, upper, .. } => Some((lower, upper)),
            VariableSpec::Integer { lower, upper, .. } => Some((lower as f64, upper as f64)),
            VariableSpec::Categorical { .. } => None,
        }
    }

    fn check(&self, index: usize) -> Result<()> {
        match self {
            VariableSpec::Continuous { lower, upper, .. } => {
                if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                    return Err(Error::InvalidSpec(format!(
                        "variable {index}: continuous bounds [{lower}, {upper}] need lower < upper"
                    )));
                }
            }
            VariableSpec::Integer { lower, upper, .. } => {
                if lower >= upper {
                    return Err(Error::InvalidSpec(format!(
                        "variable {index}: integer bounds [{lower}, {upper}] need lower < upper"
                    )));
                }
            }
            VariableSpec::Categorical { levels, .. } => {
                if levels.len() < 2 {
                    return Err(Error::InvalidSpec(format!(
                        "variable {index}: a categorical variable needs at least 2 levels"
                    )));
                }
                let mut seen = HashSet::new();
                for l in levels {
                    if !seen.insert(l.as_str()) {
                        return Err(Error::InvalidSpec(format!(
                            "variable {index}: duplicate level name {l:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Which group a variable lives in, and its position inside that group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Continuous(usize),
    Integer(usize),
    Categorical(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesignSpace {
    variables: Vec<VariableSpec>,
    #[serde(skip)]
    slots: Vec<Slot>,
    #[serde(skip)]
    continuous: Vec<usize>,
    #[serde(skip)]
    integer: Vec<usize>,
    #[serde(skip)]
    categorical: Vec<usize>,
}

impl<'de> Deserialize<'de> for DesignSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            variables: Vec<VariableSpec>,
        }
        let raw = Raw::deserialize(d)?;
        DesignSpace::new(raw.variables).map_err(serde::de::Error::custom)
    }
}

impl DesignSpace {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidSpec("a design space needs at least one variable".into()));
        }
        let mut slots = Vec::with_capacity(variables.len());
        let (mut continuous, mut integer, mut categorical) = (vec![], vec![], vec![]);
        for (i, v) in variables.iter().enumerate() {
            v.check(i)?;
            slots.push(match v {
                VariableSpec::Continuous { .. } => {
                    continuous.push(i);
                    Slot::Continuous(continuous.len() - 1)
                }
                VariableSpec::Integer { .. } => {
                    integer.push(i);
                    Slot::Integer(integer.len() - 1)
                }
                VariableSpec::Categorical { .. } => {
                    categorical.push(i);
                    Slot::Categorical(categorical.len() - 1)
                }
            });
        }
        Ok(Self {
            variables,
            slots,
            continuous,
            integer,
            categorical,
        })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Number of continuous variables (n).
    pub fn n_continuous(&self) -> usize {
        self.continuous.len()
    }

    /// Number of integer variables (m).
    pub fn n_integer(&self) -> usize {
        self.integer.len()
    }

    /// Number of categorical variables (l).
    pub fn n_categorical(&self) -> usize {
        self.categorical.len()
    }

    pub fn continuous_spec(&self, k: usize) -> &VariableSpec {
        &self.variables[self.continuous[k]]
    }

    pub fn integer_spec(&self, k: usize) -> &VariableSpec {
        &self.variables[self.integer[k]]
    }

    pub fn categorical_spec(&self, k: usize) -> &VariableSpec {
        &self.variables[self.categorical[k]]
    }

    /// Design-space index of the k-th categorical variable.
    pub fn categorical_position(&self, k: usize) -> usize {
        self.categorical[k]
    }

    /// Level counts L_i of the categorical variables, in order.
    pub fn level_counts(&self) -> Vec<usize> {
        self.categorical
            .iter()
            .map(|&i| self.variables[i].level_count().unwrap_or(0))
            .collect()
    }

    /// Dimension of the one-hot block, Σ L_i.
    pub fn one_hot_dim(&self) -> usize {
        self.level_counts().iter().sum()
    }

    /// Dimension after continuous relaxation: n + m + Σ L_i.
    pub fn relaxed_dim(&self) -> usize {
        self.n_continuous() + self.n_integer() + self.one_hot_dim()
    }

    /// Checks every coordinate of `p` against its variable.
    pub fn validate_point<T: Scalar>(&self, p: &MixedPoint<T>) -> Result<()> {
        let expect = |expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, found })
            }
        };
        expect(self.n_continuous(), p.continuous.len())?;
        expect(self.n_integer(), p.integer.len())?;
        expect(self.n_categorical(), p.levels.len())?;
        for (k, &idx) in self.continuous.iter().enumerate() {
            let (lo, hi) = self.variables[idx].bounds().expect("continuous bounds");
            let v = p.continuous[k].to_f64_lossy();
            if !(v >= lo && v <= hi) {
                return Err(Error::OutOfBounds { index: idx, value: v });
            }
        }
        for (k, &idx) in self.integer.iter().enumerate() {
            let (lo, hi) = self.variables[idx].bounds().expect("integer bounds");
            let v = p.integer[k].to_f64_lossy();
            if !(v >= lo && v <= hi) || (v - v.round()).abs() > INTEGRAL_TOL {
                return Err(Error::OutOfBounds { index: idx, value: v });
            }
        }
        for (k, &idx) in self.categorical.iter().enumerate() {
            let count = self.variables[idx].level_count().expect("categorical levels");
            let level = p.levels[k];
            if level == 0 || level > count {
                return Err(Error::LevelOutOfRange { index: idx, level });
            }
        }
        Ok(())
    }

    /// Concatenated one-hot encodings of the categorical coordinates.
    pub fn one_hot_encode<T: Scalar>(&self, p: &MixedPoint<T>) -> Result<Vec<T>> {
        self.validate_point(p)?;
        let mut out = vec![T::zero(); self.one_hot_dim()];
        let mut offset = 0;
        for (k, count) in self.level_counts().into_iter().enumerate() {
            out[offset + p.level_index(k)] = T::one();
            offset += count;
        }
        Ok(out)
    }

    /// Maps continuous and integer coordinates affinely onto [0, 1].
    pub fn normalize<T: Scalar>(&self, p: &MixedPoint<T>) -> Result<MixedPoint<T>> {
        self.validate_point(p)?;
        Ok(self.normalize_unchecked(p))
    }

    pub(crate) fn normalize_unchecked<T: Scalar>(&self, p: &MixedPoint<T>) -> MixedPoint<T> {
        let scale = |idx: usize, v: T| {
            let (lo, hi) = self.variables[idx].bounds().expect("bounded variable");
            (v - T::c(lo)) / T::c(hi - lo)
        };
        MixedPoint {
            continuous: self
                .continuous
                .iter()
                .zip(&p.continuous)
                .map(|(&i, &v)| scale(i, v))
                .collect(),
            integer: self
                .integer
                .iter()
                .zip(&p.integer)
                .map(|(&i, &v)| scale(i, v))
                .collect(),
            levels: p.levels.clone(),
        }
    }

    /// Inverse of [`normalize`](Self::normalize); integers are rounded to the nearest value.
    pub fn denormalize<T: Scalar>(&self, p: &MixedPoint<T>) -> MixedPoint<T> {
        let unscale = |idx: usize, v: T| {
            let (lo, hi) = self.variables[idx].bounds().expect("bounded variable");
            T::c(lo) + v * T::c(hi - lo)
        };
        MixedPoint {
            continuous: self
                .continuous
                .iter()
                .zip(&p.continuous)
                .map(|(&i, &v)| unscale(i, v))
                .collect(),
            integer: self
                .integer
                .iter()
                .zip(&p.integer)
                .map(|(&i, &v)| unscale(i, v).round())
                .collect(),
            levels: p.levels.clone(),
        }
    }

    /// Builds a point from values listed in design-space order.
    ///
    /// Categorical values are 1-based level numbers.
    pub fn point_from_ordered<T: Scalar>(&self, values: &[f64]) -> Result<MixedPoint<T>> {
        if values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: values.len(),
            });
        }
        let mut p = MixedPoint {
            continuous: Vec::with_capacity(self.n_continuous()),
            integer: Vec::with_capacity(self.n_integer()),
            levels: Vec::with_capacity(self.n_categorical()),
        };
        for (i, (&v, slot)) in values.iter().zip(&self.slots).enumerate() {
            match slot {
                Slot::Continuous(_) => p.continuous.push(T::c(v)),
                Slot::Integer(_) => p.integer.push(T::c(v)),
                Slot::Categorical(_) => {
                    if v < 0.0 || v.fract() != 0.0 {
                        return Err(Error::LevelOutOfRange { index: i, level: 0 });
                    }
                    p.levels.push(v as usize)
                }
            }
        }
        self.validate_point(&p)?;
        Ok(p)
    }

    /// Coordinates of `p` in design-space order, levels as 1-based numbers.
    pub fn ordered_values<T: Scalar>(&self, p: &MixedPoint<T>) -> Vec<f64> {
        self.slots
            .iter()
            .map(|slot| match *slot {
                Slot::Continuous(k) => p.continuous[k].to_f64_lossy(),
                Slot::Integer(k) => p.integer[k].to_f64_lossy(),
                Slot::Categorical(k) => p.levels[k] as f64,
            })
            .collect()
    }

    fn parse_field(&self, var: usize, field: &str) -> Result<f64> {
        let field = field.trim();
        match &self.variables[var] {
            VariableSpec::Categorical { levels, .. } => {
                if let Some(pos) = levels.iter().position(|l| l == field) {
                    return Ok((pos + 1) as f64);
                }
                field
                    .parse::<usize>()
                    .map(|v| v as f64)
                    .map_err(|_| Error::Parse(format!("variable {var}: unknown level {field:?}")))
            }
            _ => field
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("variable {var}: not a number: {field:?}"))),
        }
    }

    fn format_field(&self, var: usize, value: f64) -> String {
        match &self.variables[var] {
            VariableSpec::Categorical { levels, .. } => levels
                .get((value as usize).wrapping_sub(1))
                .cloned()
                .unwrap_or_else(|| value.to_string()),
            VariableSpec::Integer { .. } => format!("{}", value.round() as i64),
            VariableSpec::Continuous { .. } => format!("{value:?}"),
        }
    }

    /// Column names used in the delimited files.
    pub fn column_names(&self) -> Vec<String> {
        self.variables
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if v.name().is_empty() {
                    format!("x{}", i + 1)
                } else {
                    v.name().to_string()
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Writes points as CSV with a header row; `targets`, when given, adds a final `y` column.
    pub fn write_points<W: Write, T: Scalar>(
        &self,
        out: W,
        points: &[MixedPoint<T>],
        targets: Option<&[T]>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.column_names();
        if targets.is_some() {
            header.push("y".into());
        }
        w.write_record(&header)?;
        for (r, p) in points.iter().enumerate() {
            let mut row: Vec<String> = self
                .ordered_values(p)
                .into_iter()
                .enumerate()
                .map(|(i, v)| self.format_field(i, v))
                .collect();
            if let Some(t) = targets {
                row.push(format!("{:?}", t[r].to_f64_lossy()));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV points file. With `with_targets`, the last column holds targets.
    pub fn read_points<R: Read, T: Scalar>(
        &self,
        input: R,
        with_targets: bool,
    ) -> Result<(Vec<MixedPoint<T>>, Vec<T>)> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let expected = self.dim() + usize::from(with_targets);
        let header_len = rdr.headers()?.len();
        if header_len != expected {
            return Err(Error::Parse(format!(
                "expected {expected} columns in header, found {header_len}"
            )));
        }
        let (mut points, mut targets) = (Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != expected {
                return Err(Error::Parse(format!(
                    "row {}: expected {expected} fields, found {}",
                    line + 1,
                    rec.len()
                )));
            }
            let values = (0..self.dim())
                .map(|i| self.parse_field(i, &rec[i]))
                .collect::<Result<Vec<_>>>()?;
            points.push(self.point_from_ordered(&values)?);
            if with_targets {
                let y: f64 = rec[self.dim()]
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: bad target", line + 1)))?;
                targets.push(T::c(y));
            }
        }
        Ok((points, targets))
    }
}

/// A point w = (x, z, c). Integer coordinates are held as reals so the same
/// type carries normalized points; levels are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedPoint<T> {
    pub continuous: Vec<T>,
    pub integer: Vec<T>,
    pub levels: Vec<usize>,
}

impl<T: Scalar> MixedPoint<T> {
    pub fn new(continuous: Vec<T>, integer: Vec<T>, levels: Vec<usize>) -> Self {
        Self {
            continuous,
            integer,
            levels,
        }
    }

    pub fn continuous_only(x: Vec<T>) -> Self {
        Self::new(x, vec![], vec![])
    }

    pub fn categorical_only(levels: Vec<usize>) -> Self {
        Self::new(vec![], vec![], levels)
    }

    /// 0-based index of the level taken on categorical variable `k`.
    #[inline]
    pub fn level_index(&self, k: usize) -> usize {
        self.levels[k] - 1
    }
}

/// A DoE (W, y) over a design space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dataset<T> {
    space: DesignSpace,
    points: Vec<MixedPoint<T>>,
    targets: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(space: DesignSpace, points: Vec<MixedPoint<T>>, targets: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpec("a dataset needs at least one point".into()));
        }
        if points.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: targets.len(),
            });
        }
        for p in &points {
            space.validate_point(p)?;
        }
        if let Some(bad) = targets.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidSpec(format!("target {bad} is not finite")));
        }
        Ok(Self {
            space,
            points,
            targets,
        })
    }

    /// Evaluates `f` at every point.
    pub fn from_fn(
        space: DesignSpace,
        points: Vec<MixedPoint<T>>,
        f: impl Fn(&MixedPoint<T>) -> T,
    ) -> Result<Self> {
        let targets = points.iter().map(&f).collect();
        Self::new(space, points, targets)
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn points(&self) -> &[MixedPoint<T>] {
        &self.points
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same points with replaced targets.
    pub fn with_targets(&self, targets: Vec<T>) -> Result<Self> {
        Self::new(self.space.clone(), self.points.clone(), targets)
    }

    pub(crate) fn from_parts_unchecked(space: DesignSpace, points: Vec<MixedPoint<T>>, targets: Vec<T>) -> Self {
        Self {
            space,
            points,
            targets,
        }
    }

    pub fn read_csv<R: Read>(space: DesignSpace, input: R) -> Result<Self> {
        let (points, targets) = space.read_points(input, true)?;
        Self::new(space, points, targets)
    }

    pub fn load(space: DesignSpace, path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(space, std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.space.write_points(out, &self.points, Some(&self.targets))
    }
}
