//! Irregular domains inside the bounding box, rejection samplers and
//! analytic metadata.
//!
//! Catalog geometry is stated in the coordinates of `(-1, 1)^d`. When the box
//! is enlarged to `(-T, T)^d` only `FullBox` grows with it, every other member
//! keeps its shape and simply occupies a smaller fraction of the box.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{streams, StreamRng};
use crate::targets::TargetFunction;

/// Proposals allowed per requested sample before rejection sampling gives up.
pub const REJECTION_CAP_FACTOR: u64 = 10_000;

const MANDELBROT_ITERATIONS: u32 = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    /// The whole box `D`.
    FullBox,
    /// `[-1, 1]^d` minus the open positive quadrant in `(y1, y2)`.
    LShape,
    /// `y1 + y2 <= 1`.
    LinearConstraint,
    /// `y1^2 + y2^2 >= rho`.
    DiscExclusion { rho: f64 },
    /// Euclidean ball `|y| <= r`.
    Circle { radius: f64 },
    /// `inner <= |y| <= outer`.
    Annulus { inner: f64, outer: f64 },
    /// `sum_i y_i <= 1`.
    Corner,
    /// `|y| >= r`.
    NormExclusion { radius: f64 },
    UnitBall,
    /// `{ f >= 0 }` for a catalog target `f`.
    ImplicitNonneg { target: TargetFunction },
    Mandelbrot,
    /// The cube `[lower, upper]^d`.
    SubBox { lower: f64, upper: f64 },
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::FullBox => f.write_str("full_box"),
            DomainKind::LShape => f.write_str("lshape"),
            DomainKind::LinearConstraint => f.write_str("linear_constraint"),
            DomainKind::DiscExclusion { rho } => write!(f, "disc_exclusion({rho})"),
            DomainKind::Circle { radius } => write!(f, "circle({radius})"),
            DomainKind::Annulus { inner, outer } => write!(f, "annulus({inner},{outer})"),
            DomainKind::Corner => f.write_str("corner"),
            DomainKind::NormExclusion { radius } => write!(f, "norm_exclusion({radius})"),
            DomainKind::UnitBall => f.write_str("unit_ball"),
            DomainKind::ImplicitNonneg { target } => write!(f, "implicit_nonneg({target})"),
            DomainKind::Mandelbrot => f.write_str("mandelbrot"),
            DomainKind::SubBox { lower, upper } => write!(f, "sub_box({lower},{upper})"),
        }
    }
}

fn parse_args(s: &str, name: &str) -> Option<String> {
    s.strip_prefix(name)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .map(str::to_string)
}

fn parse_floats(args: &str, expected: usize, whole: &str) -> Result<Vec<f64>> {
    let vals = args
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{t}` in domain `{whole}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != expected {
        return Err(Error::Parse(format!(
            "domain `{whole}` takes {expected} argument(s), got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace(' ', "");
        let simple = match s.as_str() {
            "full_box" | "fullbox" | "box" => Some(DomainKind::FullBox),
            "lshape" | "l_shape" => Some(DomainKind::LShape),
            "linear_constraint" => Some(DomainKind::LinearConstraint),
            "corner" => Some(DomainKind::Corner),
            "unit_ball" => Some(DomainKind::UnitBall),
            "mandelbrot" => Some(DomainKind::Mandelbrot),
            _ => None,
        };
        if let Some(k) = simple {
            return Ok(k);
        }
        if let Some(a) = parse_args(&s, "disc_exclusion") {
            let v = parse_floats(&a, 1, &s)?;
            return Ok(DomainKind::DiscExclusion { rho: v[0] });
        }
        if let Some(a) = parse_args(&s, "circle") {
            let v = parse_floats(&a, 1, &s)?;
            return Ok(DomainKind::Circle { radius: v[0] });
        }
        if let Some(a) = parse_args(&s, "annulus") {
            let v = parse_floats(&a, 2, &s)?;
            return Ok(DomainKind::Annulus { inner: v[0], outer: v[1] });
        }
        if let Some(a) = parse_args(&s, "norm_exclusion") {
            let v = parse_floats(&a, 1, &s)?;
            return Ok(DomainKind::NormExclusion { radius: v[0] });
        }
        if let Some(a) = parse_args(&s, "sub_box") {
            let v = parse_floats(&a, 2, &s)?;
            return Ok(DomainKind::SubBox { lower: v[0], upper: v[1] });
        }
        if let Some(a) = parse_args(&s, "implicit_nonneg") {
            return Ok(DomainKind::ImplicitNonneg { target: a.parse()? });
        }
        Err(Error::Parse(format!("unknown domain `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMeasure {
    UniformOnOmega,
    ChebyshevOnOmega,
}

impl SamplingMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            SamplingMeasure::UniformOnOmega => "uniform",
            SamplingMeasure::ChebyshevOnOmega => "chebyshev",
        }
    }
}

impl fmt::Display for SamplingMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplingMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "uniform_on_omega" => Ok(SamplingMeasure::UniformOnOmega),
            "chebyshev" | "chebyshev_on_omega" => Ok(SamplingMeasure::ChebyshevOnOmega),
            other => Err(Error::Parse(format!("unknown sampling measure `{other}`"))),
        }
    }
}

/// A catalog domain together with its dimension and box half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub dim: usize,
    pub half_width: f64,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, dim: usize) -> Result<Self> {
        Self::with_half_width(kind, dim, 1.0)
    }

    pub fn with_half_width(kind: DomainKind, dim: usize, half_width: f64) -> Result<Self> {
        let spec = DomainSpec { kind, dim, half_width };
        spec.validate()?;
        Ok(spec)
    }

    pub fn full_box(dim: usize) -> Result<Self> {
        Self::new(DomainKind::FullBox, dim)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        let bad = |msg: String| Err(Error::Parameter(format!("domain {}: {msg}", self.kind)));
        if d == 0 {
            return Err(Error::Shape("domain dimension must be >= 1".into()));
        }
        if !(self.half_width >= 1.0 && self.half_width.is_finite()) {
            return bad(format!("box half-width must be >= 1, got {}", self.half_width));
        }
        let sqrt_d = (d as f64).sqrt();
        match &self.kind {
            DomainKind::LShape | DomainKind::LinearConstraint if d < 2 => {
                bad("requires d >= 2".into())
            }
            DomainKind::DiscExclusion { .. } if d < 2 => bad("requires d >= 2".into()),
            DomainKind::DiscExclusion { rho } if !(*rho >= 0.0 && *rho < 2.0) => {
                bad("rho must lie in [0, 2)".into())
            }
            DomainKind::Circle { radius } if !(*radius > 0.0 && radius.is_finite()) => {
                bad("radius must be positive".into())
            }
            DomainKind::Annulus { inner, outer }
                if !(*inner >= 0.0 && inner < outer && *inner < sqrt_d && outer.is_finite()) =>
            {
                bad("radii must satisfy 0 <= inner < outer and inner < sqrt(d)".into())
            }
            DomainKind::NormExclusion { radius } if !(*radius >= 0.0 && *radius < sqrt_d) => {
                bad("radius must lie in [0, sqrt(d))".into())
            }
            DomainKind::Mandelbrot if d != 2 => bad("requires d = 2".into()),
            DomainKind::SubBox { lower, upper }
                if !(*lower >= -1.0 && lower < upper && *upper <= 1.0) =>
            {
                bad("bounds must satisfy -1 <= lower < upper <= 1".into())
            }
            DomainKind::ImplicitNonneg { target } => target.check_dimension(d),
            _ => Ok(()),
        }
    }

    /// Membership test. Points outside the closed box are an error.
    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        if point.len() != self.dim {
            return Err(Error::Shape(format!(
                "point has {} coordinates, domain has dimension {}",
                point.len(),
                self.dim
            )));
        }
        if point.iter().any(|v| !(v.abs() <= self.half_width)) {
            return Err(Error::OutsideBox {
                point: point.to_vec(),
                half_width: self.half_width,
            });
        }
        Ok(self.contains_in_box(point))
    }

    /// Membership for a point already known to lie in the box.
    pub(crate) fn contains_in_box(&self, y: &[f64]) -> bool {
        if let DomainKind::FullBox = self.kind {
            return true;
        }
        if y.iter().any(|v| v.abs() > 1.0) {
            return false;
        }
        let norm2 = || y.iter().map(|v| v * v).sum::<f64>();
        match &self.kind {
            DomainKind::FullBox => true,
            DomainKind::LShape => y[0] <= 0.0 || y[1] <= 0.0,
            DomainKind::LinearConstraint => y[0] + y[1] <= 1.0,
            DomainKind::DiscExclusion { rho } => y[0] * y[0] + y[1] * y[1] >= *rho,
            DomainKind::Circle { radius } => norm2() <= radius * radius,
            DomainKind::Annulus { inner, outer } => {
                let r2 = norm2();
                r2 >= inner * inner && r2 <= outer * outer
            }
            DomainKind::Corner => y.iter().sum::<f64>() <= 1.0,
            DomainKind::NormExclusion { radius } => norm2() >= radius * radius,
            DomainKind::UnitBall => norm2() <= 1.0,
            DomainKind::ImplicitNonneg { target } => target.eval(y) >= 0.0,
            DomainKind::Mandelbrot => mandelbrot_member(y[0], y[1]),
            DomainKind::SubBox { lower, upper } => y.iter().all(|v| v >= lower && v <= upper),
        }
    }

    /// `nu(Omega)` for the box measure matched to `measure`, when known in closed form.
    pub fn analytic_volume_fraction(&self, measure: SamplingMeasure) -> Option<f64> {
        let d = self.dim as i32;
        if let DomainKind::FullBox = self.kind {
            return Some(1.0);
        }
        if measure == SamplingMeasure::ChebyshevOnOmega {
            return match self.kind {
                DomainKind::SubBox { lower, upper } if self.half_width == 1.0 => {
                    Some(((upper.asin() - lower.asin()) / PI).powi(d))
                }
                _ => None,
            };
        }
        // fraction of [-1, 1]^d, rescaled to the box below
        let cube = 2f64.powi(d);
        let frac = match &self.kind {
            DomainKind::FullBox => 1.0,
            DomainKind::LShape => 0.75,
            DomainKind::LinearConstraint => 0.875,
            DomainKind::DiscExclusion { rho } if *rho <= 1.0 => 1.0 - PI * rho / 4.0,
            DomainKind::Circle { radius } if *radius <= 1.0 => {
                ball_volume(self.dim) * radius.powi(d) / cube
            }
            DomainKind::UnitBall => ball_volume(self.dim) / cube,
            DomainKind::Annulus { inner, outer } if *outer <= 1.0 => {
                ball_volume(self.dim) * (outer.powi(d) - inner.powi(d)) / cube
            }
            DomainKind::NormExclusion { radius } if *radius <= 1.0 => {
                1.0 - ball_volume(self.dim) * radius.powi(d) / cube
            }
            DomainKind::Corner => irwin_hall_cdf(self.dim, (self.dim as f64 + 1.0) / 2.0),
            DomainKind::SubBox { lower, upper } => ((upper - lower) / 2.0).powi(d),
            _ => return None,
        };
        Some(frac / self.half_width.powi(d))
    }

    /// The analytic `lambda` of the rectangle property, where elementary
    /// geometry gives one.
    ///
    /// Domains of the form `Omega_2 x [-1, 1]^(d-2)` inherit the planar value,
    /// since extruding a covering by rectangles preserves the area ratios.
    pub fn lambda_rectangle_constant(&self) -> Option<f64> {
        match &self.kind {
            DomainKind::FullBox | DomainKind::SubBox { .. } => Some(1.0),
            DomainKind::LShape => Some(2.0 / 3.0),
            DomainKind::LinearConstraint => Some(4.0 / 7.0),
            DomainKind::Corner => match self.dim {
                1 => Some(1.0),
                2 => Some(4.0 / 7.0),
                _ => None,
            },
            DomainKind::DiscExclusion { rho } => disc_exclusion_lambda(rho.sqrt()),
            DomainKind::NormExclusion { radius } if self.dim == 2 => disc_exclusion_lambda(*radius),
            _ => None,
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} d={}", self.kind, self.dim)?;
        if self.half_width != 1.0 {
            write!(f, " T={}", self.half_width)?;
        }
        Ok(())
    }
}

/// Square minus the disc of radius `r` centred at the origin. Each point of
/// the complement of the disc is covered by the rectangle spanned by it and
/// the nearest square corner; the smallest such rectangle sits on the
/// diagonal (`r <= 1/sqrt 2`) or where the rectangle touches the arc tangentially.
fn disc_exclusion_lambda(r: f64) -> Option<f64> {
    if r <= 0.0 {
        return Some(1.0);
    }
    if r >= 1.0 {
        return None;
    }
    let min_area = if r <= std::f64::consts::FRAC_1_SQRT_2 {
        (1.0 - r / std::f64::consts::SQRT_2).powi(2)
    } else {
        (1.0 - r * r) / 2.0
    };
    Some(min_area / (1.0 - PI * r * r / 4.0))
}

/// Lebesgue volume of the Euclidean unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    let (mut v, start) = if d.is_multiple_of(2) { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= d {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// `P(U_1 + ... + U_d <= x)` for independent `U_i ~ U[0, 1]`.
pub fn irwin_hall_cdf(d: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= d as f64 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut binom = 1.0;
    for k in 0..=(x.floor() as usize) {
        let term = binom * (x - k as f64).powi(d as i32);
        sum += if k % 2 == 0 { term } else { -term };
        binom = binom * (d - k) as f64 / (k + 1) as f64;
    }
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    (sum / fact).clamp(0.0, 1.0)
}

fn mandelbrot_member(y1: f64, y2: f64) -> bool {
    let (cr, ci) = (1.25 * y1 - 0.75, 1.15 * y2);
    let (mut zr, mut zi) = (0.0f64, 0.0f64);
    for _ in 0..MANDELBROT_ITERATIONS {
        let nr = zr * zr - zi * zi + cr;
        zi = 2.0 * zr * zi + ci;
        zr = nr;
        if zr * zr + zi * zi > 4.0 {
            return false;
        }
    }
    true
}

/// `M` points drawn i.i.d. from a measure restricted to a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub domain: DomainSpec,
    pub measure: SamplingMeasure,
    pub seed: u64,
    pub stream: u64,
    /// Row-major `M x d` coordinates.
    pub points: Vec<f64>,
    /// Proposals consumed by rejection sampling (0 when loaded from disk).
    pub proposals: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len() / self.domain.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.domain.dim;
        &self.points[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.domain.dim)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            return f64::NAN;
        }
        self.len() as f64 / self.proposals as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# domain={} d={} measure={} seed={} M={}",
            self.domain.kind,
            self.domain.dim,
            self.measure,
            self.seed,
            self.len()
        );
        if self.domain.half_width != 1.0 {
            out.push_str(&format!(" T={}", self.domain.half_width));
        }
        if self.stream != streams::TRAINING {
            out.push_str(&format!(" stream={}", self.stream));
        }
        out.push('\n');
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or_else(|| Error::Parse("sample file lacks a `#` header".into()))?;
        let mut kind = None;
        let mut dim = None;
        let mut measure = None;
        let mut seed = None;
        let mut m = None;
        let mut half_width = 1.0;
        let mut stream = streams::TRAINING;
        for tok in header.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token `{tok}`")))?;
            let num_err = || Error::Parse(format!("bad value in header token `{tok}`"));
            match key {
                "domain" => kind = Some(val.parse::<DomainKind>()?),
                "d" => dim = Some(val.parse::<usize>().map_err(|_| num_err())?),
                "measure" => measure = Some(val.parse::<SamplingMeasure>()?),
                "seed" => seed = Some(val.parse::<u64>().map_err(|_| num_err())?),
                "M" => m = Some(val.parse::<usize>().map_err(|_| num_err())?),
                "T" => half_width = val.parse::<f64>().map_err(|_| num_err())?,
                "stream" => stream = val.parse::<u64>().map_err(|_| num_err())?,
                _ => return Err(Error::Parse(format!("unknown header key `{key}`"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("sample header lacks `{k}`"));
        let domain = DomainSpec::with_half_width(
            kind.ok_or_else(|| missing("domain"))?,
            dim.ok_or_else(|| missing("d"))?,
            half_width,
        )?;
        let m = m.ok_or_else(|| missing("M"))?;
        let mut points = Vec::with_capacity(m * domain.dim);
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let before = points.len();
            for t in line.split(',') {
                points.push(t.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("bad coordinate `{t}` on data line {}", lineno + 1))
                })?);
            }
            if points.len() - before != domain.dim {
                return Err(Error::Shape(format!(
                    "data line {} has {} coordinates, expected {}",
                    lineno + 1,
                    points.len() - before,
                    domain.dim
                )));
            }
        }
        if points.len() != m * domain.dim {
            return Err(Error::Shape(format!(
                "header declares M={m} but file holds {} points",
                points.len() / domain.dim
            )));
        }
        Ok(SampleSet {
            domain,
            measure: measure.ok_or_else(|| missing("measure"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            stream,
            points,
            proposals: 0,
        })
    }
}

/// Rejection sampling from `measure` restricted to the domain, on a chosen
/// substream of `seed`.
pub fn draw_samples_on_stream(
    domain: &DomainSpec,
    measure: SamplingMeasure,
    m: usize,
    seed: u64,
    stream: u64,
) -> Result<SampleSet> {
    if m == 0 {
        return Err(Error::InvalidBudget("at least one sample is required".into()));
    }
    if measure == SamplingMeasure::ChebyshevOnOmega && domain.half_width != 1.0 {
        return Err(Error::Parameter(
            "Chebyshev sampling is defined on (-1, 1)^d only".into(),
        ));
    }
    let d = domain.dim;
    let t = domain.half_width;
    let cap = REJECTION_CAP_FACTOR.saturating_mul(m as u64);
    let mut rng = StreamRng::new(seed, stream);
    let mut points = Vec::with_capacity(m * d);
    let mut proposal = vec![0.0; d];
    let mut proposals = 0u64;
    let mut accepted = 0usize;
    while accepted < m {
        if proposals >= cap {
            return Err(Error::SamplingFailure {
                proposals,
                accepted,
                acceptance_rate: accepted as f64 / proposals as f64,
            });
        }
        for v in proposal.iter_mut() {
            *v = match measure {
                SamplingMeasure::UniformOnOmega => -t + 2.0 * t * rng.uniform(),
                SamplingMeasure::ChebyshevOnOmega => (PI * rng.uniform()).cos(),
            };
        }
        proposals += 1;
        if domain.contains_in_box(&proposal) {
            points.extend_from_slice(&proposal);
            accepted += 1;
        }
    }
    Ok(SampleSet {
        domain: domain.clone(),
        measure,
        seed,
        stream,
        points,
        proposals,
    })
}

pub fn draw_uniform_samples(domain: &DomainSpec, m: usize, seed: u64) -> Result<SampleSet> {
    draw_samples_on_stream(domain, SamplingMeasure::UniformOnOmega, m, seed, streams::TRAINING)
}

pub fn draw_chebyshev_samples(domain: &DomainSpec, m: usize, seed: u64) -> Result<SampleSet> {
    draw_samples_on_stream(domain, SamplingMeasure::ChebyshevOnOmega, m, seed, streams::TRAINING)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Monte-Carlo estimate of `nu(Omega)` under the box measure matched to
/// `measure`, with its binomial standard error.
pub fn estimate_volume_fraction_under(
    domain: &DomainSpec,
    measure: SamplingMeasure,
    k: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    if k == 0 {
        return Err(Error::InvalidBudget("volume estimate needs K >= 1".into()));
    }
    if measure == SamplingMeasure::ChebyshevOnOmega && domain.half_width != 1.0 {
        return Err(Error::Parameter(
            "Chebyshev sampling is defined on (-1, 1)^d only".into(),
        ));
    }
    let t = domain.half_width;
    let mut rng = StreamRng::new(seed, streams::VOLUME);
    let mut y = vec![0.0; domain.dim];
    let mut hits = 0usize;
    for _ in 0..k {
        for v in y.iter_mut() {
            *v = match measure {
                SamplingMeasure::UniformOnOmega => -t + 2.0 * t * rng.uniform(),
                SamplingMeasure::ChebyshevOnOmega => (PI * rng.uniform()).cos(),
            };
        }
        if domain.contains_in_box(&y) {
            hits += 1;
        }
    }
    let p = hits as f64 / k as f64;
    Ok(VolumeEstimate {
        mean: p,
        std_err: (p * (1.0 - p) / k as f64).sqrt(),
        samples: k,
    })
}

pub fn estimate_volume_fraction(domain: &DomainSpec, k: usize, seed: u64) -> Result<VolumeEstimate> {
    estimate_volume_fraction_under(domain, SamplingMeasure::UniformOnOmega, k, seed)
}
