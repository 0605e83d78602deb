//! Closed field loops on the Bloch sphere and their signed solid angle.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{cross, PauliVector};
use crate::scalar::{reduce_solid_angle, Real};
use crate::tolerance;

/// Minimum number of segments in a loop.
pub const MIN_SEGMENTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Orientation {
    /// Counterclockwise seen from outside the sphere.
    #[default]
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Orientation::Positive => T::one(),
            Orientation::Negative => -T::one(),
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LoopKind<T> {
    /// Circle of angular radius `half_angle` about `axis`, starting at `ẑ`.
    Cone {
        axis: PauliVector<T>,
        half_angle: T,
        orientation: Orientation,
    },
    /// Every sample equals `axis`.
    Constant { axis: PauliVector<T> },
    Custom,
}

/// Sampled closed path of unit field directions: `N + 1` samples with the
/// last equal to the first.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldLoop<T> {
    samples: Vec<PauliVector<T>>,
    kind: LoopKind<T>,
}

/// Report produced by [`validate_loop`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopDiagnostics<T> {
    pub n_segments: usize,
    /// Max component-wise difference between the first and last sample.
    pub closure_residual: T,
    /// Max `| |p| - 1 |` over samples.
    pub max_norm_deviation: T,
    /// Smallest and largest angle between consecutive samples, radians.
    pub min_step: T,
    pub max_step: T,
}

impl<T: Real> LoopDiagnostics<T> {
    pub fn is_closed(&self) -> bool {
        self.closure_residual <= T::tol(tolerance::LOOP_SAMPLE)
    }

    pub fn is_normalized(&self) -> bool {
        self.max_norm_deviation <= T::tol(tolerance::LOOP_SAMPLE)
    }

    pub fn is_valid(&self) -> bool {
        self.is_closed() && self.is_normalized() && self.n_segments >= MIN_SEGMENTS
    }
}

fn angle_between<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    let c = cross(a, b);
    let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    s.atan2(d)
}

/// Reports closure, normalization and step statistics of raw loop samples.
pub fn validate_loop<T: Real>(points: &[[T; 3]]) -> LoopDiagnostics<T> {
    let n_segments = points.len().saturating_sub(1);
    let closure_residual = match (points.first(), points.last()) {
        (Some(a), Some(b)) if points.len() > 1 => (0..3)
            .map(|i| (a[i] - b[i]).abs())
            .fold(T::zero(), T::max),
        _ => T::infinity(),
    };
    let max_norm_deviation = points
        .iter()
        .map(|p| ((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - T::one()).abs())
        .fold(T::zero(), T::max);
    let (mut min_step, mut max_step) = (T::infinity(), T::zero());
    for w in points.windows(2) {
        let a = angle_between(w[0], w[1]);
        min_step = min_step.min(a);
        max_step = max_step.max(a);
    }
    if n_segments == 0 {
        min_step = T::zero();
    }
    LoopDiagnostics {
        n_segments,
        closure_residual,
        max_norm_deviation,
        min_step,
        max_step,
    }
}

fn check_not_antipodal<T: Real>(samples: &[PauliVector<T>]) -> Result<()> {
    let limit = -T::one() + T::tol(tolerance::ANTIPODAL);
    for (k, w) in samples.windows(2).enumerate() {
        if w[0].dot(&w[1]) < limit {
            return Err(Error::Geometry(format!(
                "samples {k} and {} are antipodal",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Circle of angular radius `theta` about `Z' = (sin θ, 0, cos θ)`, starting
/// and ending at `ẑ`: `β̂(s) = R_{Z'}(2πs·orientation) ẑ`.
pub fn make_cone_loop<T: Real>(
    theta: T,
    n_samples: usize,
    orientation: Orientation,
) -> Result<FieldLoop<T>> {
    if !(theta >= T::zero() && theta <= T::FRAC_PI_2()) {
        return Err(Error::input(format!(
            "cone half-angle {theta} outside [0, π/2]"
        )));
    }
    if n_samples < MIN_SEGMENTS {
        return Err(Error::input(format!(
            "cone loop needs at least {MIN_SEGMENTS} samples, got {n_samples}"
        )));
    }
    let axis = PauliVector::from_angles(theta, T::zero());
    let z = PauliVector::unit_z();
    let step = T::two_pi() * orientation.sign::<T>() / T::from_count(n_samples);
    let mut samples: Vec<_> = (0..n_samples)
        .map(|k| z.rotated(&axis, step * T::from_count(k)))
        .collect();
    samples.push(samples[0]);
    Ok(FieldLoop {
        samples,
        kind: LoopKind::Cone {
            axis,
            half_angle: theta,
            orientation,
        },
    })
}

/// Loop of angular radius `radius(φ)` about `axis`, sampled at `n_samples`
/// equally spaced azimuths.
pub fn make_polar_loop<T: Real>(
    axis: &PauliVector<T>,
    n_samples: usize,
    orientation: Orientation,
    radius: impl Fn(T) -> T,
) -> Result<FieldLoop<T>> {
    if n_samples < MIN_SEGMENTS {
        return Err(Error::input(format!(
            "loop needs at least {MIN_SEGMENTS} samples, got {n_samples}"
        )));
    }
    let a = axis.components();
    let helper = if a[0].abs() < T::lit(0.9) {
        PauliVector::unit_x()
    } else {
        PauliVector::unit_y()
    };
    let e1 = {
        let c = cross(a, helper.components());
        PauliVector::normalized(c[0], c[1], c[2])?
    };
    let e2 = PauliVector::from_unit_unchecked(axis.cross(&e1));
    let sign = orientation.sign::<T>();
    let mut samples = Vec::with_capacity(n_samples + 1);
    for k in 0..n_samples {
        let phi = T::two_pi() * T::from_count(k) / T::from_count(n_samples);
        let r = radius(phi);
        let (sp, cp) = (sign * phi).sin_cos();
        let p: [T; 3] = std::array::from_fn(|i| {
            r.cos() * a[i] + r.sin() * (cp * e1.components()[i] + sp * e2.components()[i])
        });
        samples.push(PauliVector::normalized(p[0], p[1], p[2])?);
    }
    samples.push(samples[0]);
    check_not_antipodal(&samples)?;
    Ok(FieldLoop {
        samples,
        kind: LoopKind::Custom,
    })
}

impl<T: Real> FieldLoop<T> {
    /// Builds a loop from raw samples; they must already be closed and unit
    /// norm.
    pub fn custom(points: &[[T; 3]]) -> Result<Self> {
        let diag = validate_loop(points);
        if diag.n_segments < MIN_SEGMENTS {
            return Err(Error::input(format!(
                "loop needs at least {MIN_SEGMENTS} segments, got {}",
                diag.n_segments
            )));
        }
        if !diag.is_closed() {
            return Err(Error::input(format!(
                "loop is not closed: residual {}",
                diag.closure_residual
            )));
        }
        if !diag.is_normalized() {
            return Err(Error::input(format!(
                "loop sample deviates from unit norm by {}",
                diag.max_norm_deviation
            )));
        }
        let mut samples: Vec<_> = points
            .iter()
            .map(|p| PauliVector::from_unit_unchecked(*p))
            .collect();
        let last = samples.len() - 1;
        samples[last] = samples[0];
        check_not_antipodal(&samples)?;
        Ok(FieldLoop {
            samples,
            kind: LoopKind::Custom,
        })
    }

    /// Field frozen along `axis`.
    pub fn constant(axis: PauliVector<T>, n_samples: usize) -> Self {
        let n = n_samples.max(MIN_SEGMENTS);
        FieldLoop {
            samples: vec![axis; n + 1],
            kind: LoopKind::Constant { axis },
        }
    }

    pub fn samples(&self) -> &[PauliVector<T>] {
        &self.samples
    }

    pub fn kind(&self) -> &LoopKind<T> {
        &self.kind
    }

    pub fn n_segments(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn start(&self) -> PauliVector<T> {
        self.samples[0]
    }

    /// Same path traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        let kind = match self.kind {
            LoopKind::Cone {
                axis,
                half_angle,
                orientation,
            } => LoopKind::Cone {
                axis,
                half_angle,
                orientation: orientation.reversed(),
            },
            k => k,
        };
        FieldLoop { samples, kind }
    }

    /// Rigid rotation of every sample about `axis` by `angle`.
    pub fn rotated(&self, axis: &PauliVector<T>, angle: T) -> Self {
        let samples = self.samples.iter().map(|p| p.rotated(axis, angle)).collect();
        let kind = match self.kind {
            LoopKind::Cone {
                axis: a,
                half_angle,
                orientation,
            } => LoopKind::Cone {
                axis: a.rotated(axis, angle),
                half_angle,
                orientation,
            },
            LoopKind::Constant { axis: a } => LoopKind::Constant {
                axis: a.rotated(axis, angle),
            },
            LoopKind::Custom => LoopKind::Custom,
        };
        FieldLoop { samples, kind }
    }

    /// Direction at loop parameter `u ∈ [0, 1]`, by normalized linear
    /// interpolation of the two neighboring samples.
    pub fn point_at(&self, u: T) -> PauliVector<T> {
        let n = self.n_segments();
        let x = u.max(T::zero()).min(T::one()) * T::from_count(n);
        let k = x.floor().to_usize().unwrap_or(0).min(n - 1);
        let t = x - T::from_count(k);
        let a = self.samples[k].components();
        let b = self.samples[k + 1].components();
        let p: [T; 3] = std::array::from_fn(|i| a[i] + t * (b[i] - a[i]));
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        PauliVector::from_unit_unchecked(p.map(|v| v / norm))
    }

    pub fn diagnostics(&self) -> LoopDiagnostics<T> {
        let raw: Vec<_> = self.samples.iter().map(|p| p.components()).collect();
        validate_loop(&raw)
    }
}

/// Which point the triangulation fan was anchored at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReferencePoint<T> {
    Centroid(PauliVector<T>),
    /// Centroid vanished; used the cone axis.
    ConeAxis(PauliVector<T>),
    /// Centroid vanished on a non-cone loop; used the pole of the plane
    /// through the first sample and the sample farthest from it.
    Pole(PauliVector<T>),
}

impl<T: Copy> ReferencePoint<T> {
    pub fn point(&self) -> PauliVector<T> {
        match *self {
            ReferencePoint::Centroid(p) | ReferencePoint::ConeAxis(p) | ReferencePoint::Pole(p) => p,
        }
    }
}

/// Signed enclosed area in steradians, reduced into `(-2π, 2π]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolidAngle<T> {
    pub omega: T,
    pub reference: ReferencePoint<T>,
}

fn reference_point<T: Real>(lp: &FieldLoop<T>) -> Result<ReferencePoint<T>> {
    let body = &lp.samples[..lp.n_segments()];
    let mut sum = [T::zero(); 3];
    for p in body {
        for (s, v) in sum.iter_mut().zip(p.components()) {
            *s += v;
        }
    }
    let inv = T::one() / T::from_count(body.len());
    let centroid = sum.map(|v| v * inv);
    let norm = (centroid[0] * centroid[0] + centroid[1] * centroid[1] + centroid[2] * centroid[2])
        .sqrt();
    if norm >= T::lit(tolerance::CENTROID_MIN_NORM) {
        return Ok(ReferencePoint::Centroid(PauliVector::normalized(
            centroid[0],
            centroid[1],
            centroid[2],
        )?));
    }
    if let LoopKind::Cone { axis, .. } = lp.kind {
        return Ok(ReferencePoint::ConeAxis(axis));
    }
    let first = body[0];
    let far = body
        .iter()
        .map(|p| first.cross(p))
        .max_by(|a, b| {
            let na = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
            let nb = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
            na.partial_cmp(&nb).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or([T::zero(); 3]);
    PauliVector::normalized(far[0], far[1], far[2])
        .map(ReferencePoint::Pole)
        .map_err(|_| Error::Geometry("no reference point for a degenerate loop".into()))
}

/// Signed area of the spherical triangle `(c, a, b)` via L'Huilier's theorem,
/// positive when `c·(a×b) > 0`.
fn signed_triangle_area<T: Real>(c: [T; 3], a: [T; 3], b: [T; 3]) -> T {
    let side_ab = angle_between(a, b);
    let side_cb = angle_between(c, b);
    let side_ca = angle_between(c, a);
    let s = (side_ab + side_cb + side_ca) * T::lit(0.5);
    let half = T::lit(0.5);
    let prod = (s * half).tan()
        * ((s - side_ab) * half).tan()
        * ((s - side_cb) * half).tan()
        * ((s - side_ca) * half).tan();
    let excess = T::lit(4.0) * prod.max(T::zero()).sqrt().atan();
    let triple = {
        let ab = cross(a, b);
        c[0] * ab[0] + c[1] * ab[1] + c[2] * ab[2]
    };
    if triple < T::zero() {
        -excess
    } else {
        excess
    }
}

/// Signed spherical area enclosed by `lp`: sum of signed triangle excesses
/// fanned out from a reference point.
pub fn solid_angle<T: Real>(lp: &FieldLoop<T>) -> Result<SolidAngle<T>> {
    check_not_antipodal(&lp.samples)?;
    let reference = reference_point(lp)?;
    let c = reference.point();
    let limit = -T::one() + T::tol(tolerance::ANTIPODAL);
    if lp.samples.iter().any(|p| p.dot(&c) < limit) {
        return Err(Error::Geometry(
            "loop passes through the antipode of its reference point".into(),
        ));
    }
    let c = c.components();
    let total = lp.samples.windows(2).fold(T::zero(), |acc, w| {
        acc + signed_triangle_area(c, w[0].components(), w[1].components())
    });
    Ok(SolidAngle {
        omega: reduce_solid_angle(total),
        reference,
    })
}

/// Parses a loop from a whitespace-separated `x y z` table, one sample per
/// line. Blank lines and `#` comments are skipped. Samples within 1e-6 of
/// unit norm are renormalized; closure is checked, not assumed.
pub fn parse_loop_table<T: Real>(text: &str) -> Result<FieldLoop<T>> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::input(format!("line {}: {e}", lineno + 1)))?;
        if values.len() != 3 {
            return Err(Error::input(format!(
                "line {}: expected 3 values, found {}",
                lineno + 1,
                values.len()
            )));
        }
        let n = (values[0] * values[0] + values[1] * values[1] + values[2] * values[2]).sqrt();
        if !((n - 1.0).abs() <= 1e-6) {
            return Err(Error::input(format!(
                "line {}: sample norm {n} is not 1",
                lineno + 1
            )));
        }
        points.push([
            T::lit(values[0] / n),
            T::lit(values[1] / n),
            T::lit(values[2] / n),
        ]);
    }
    FieldLoop::custom(&points)
}

/// Inverse of [`parse_loop_table`].
pub fn write_loop_table<T: Real>(lp: &FieldLoop<T>) -> String {
    let mut out = String::new();
    for p in lp.samples() {
        let [x, y, z] = p.components().map(|v| v.to_f64().unwrap_or(f64::NAN));
        let _ = writeln!(out, "{x} {y} {z}");
    }
    out
}
