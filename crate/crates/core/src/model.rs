//! Process models: intensity φ, the conditional quantile transform Φ_x and its
//! inverse, and frontier functions with declared bounds.

use crate::error::{Error, Result};
use crate::geometry::{self, Direction};
use crate::quad;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

/// Intensity family of a process model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// φ ≡ 1.
    Uniform,
    /// φ(x, y) = γ_d y^{d−1}, the Cartesian polar model.
    Polar,
    /// User-supplied φ, integrated numerically.
    Custom,
}

type Intensity = Arc<dyn Fn(&Direction, f64) -> f64 + Send + Sync>;

/// The triple (φ, base measure density h_d, scale c) plus quantile transforms.
#[derive(Clone)]
pub struct ProcessModel {
    d: u32,
    c: f64,
    kind: ModelKind,
    phi: Option<Intensity>,
    /// Clamp bound for custom intensities: φ(x, y) evaluates at min(y, y_max),
    /// which extends φ continuously beyond the support.
    y_max: f64,
}

impl fmt::Debug for ProcessModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProcessModel")
            .field("d", &self.d)
            .field("c", &self.c)
            .field("kind", &self.kind)
            .finish()
    }
}

impl ProcessModel {
    pub fn uniform(d: u32, c: f64) -> Result<Self> {
        Self::validate(d, c)?;
        Ok(ProcessModel { d, c, kind: ModelKind::Uniform, phi: None, y_max: f64::INFINITY })
    }

    pub fn polar(d: u32, c: f64) -> Result<Self> {
        Self::validate(d, c)?;
        geometry::gamma_d(d)?;
        Ok(ProcessModel { d, c, kind: ModelKind::Polar, phi: None, y_max: f64::INFINITY })
    }

    /// A custom intensity. `y_max` bounds the radii the model will ever see;
    /// it is also the clamp point extending φ beyond the support.
    pub fn custom(
        d: u32,
        c: f64,
        phi: impl Fn(&Direction, f64) -> f64 + Send + Sync + 'static,
        y_max: f64,
    ) -> Result<Self> {
        Self::validate(d, c)?;
        if y_max.is_nan() || y_max <= 0.0 {
            return Err(Error::InvalidConfig("custom model needs y_max > 0".into()));
        }
        Ok(ProcessModel { d, c, kind: ModelKind::Custom, phi: Some(Arc::new(phi)), y_max })
    }

    fn validate(d: u32, c: f64) -> Result<()> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidConfig(format!("intensity scale c must be positive, got {c}")));
        }
        Ok(())
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Identifier used in sample sidecars, e.g. `polar:d=2`.
    pub fn tag(&self) -> String {
        let kind = match self.kind {
            ModelKind::Uniform => "uniform",
            ModelKind::Polar => "polar",
            ModelKind::Custom => "custom",
        };
        format!("{kind}:d={}", self.d)
    }

    /// The intensity φ(x, y). Custom intensities are clamped at y_max.
    pub fn intensity(&self, x: &Direction, y: f64) -> Result<f64> {
        match self.kind {
            ModelKind::Uniform => Ok(1.0),
            ModelKind::Polar => Ok(geometry::gamma_d(self.d)? * y.powi(self.d as i32 - 1)),
            ModelKind::Custom => {
                let phi = self.phi.as_ref().expect("custom model has an intensity");
                let v = phi(x, y.min(self.y_max));
                if v < 0.0 {
                    Err(Error::InvalidIntensity(v))
                } else {
                    Ok(v)
                }
            }
        }
    }

    /// Density of ν with respect to Lebesgue measure on E (h_d).
    pub fn base_density(&self, x: &Direction) -> Result<f64> {
        geometry::base_density(x)
    }

    /// Φ_x(y) = ∫_0^y φ(x, t) dt: closed form for the built-in kinds, adaptive
    /// quadrature for custom intensities.
    pub fn quantile_forward(&self, x: &Direction, y: f64) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::QuantileOutOfRange(y));
        }
        match self.kind {
            ModelKind::Uniform => Ok(y),
            ModelKind::Polar => {
                Ok(geometry::gamma_d(self.d)? * y.powi(self.d as i32) / self.d as f64)
            }
            ModelKind::Custom => {
                let phi = self.phi.as_ref().expect("custom model has an intensity");
                let bad = Cell::new(false);
                let v = quad::integrate(
                    |t| {
                        let p = phi(x, t.min(self.y_max));
                        if p < 0.0 {
                            bad.set(true);
                        }
                        p
                    },
                    0.0,
                    y,
                    1e-9,
                    quad::DEFAULT_BUDGET,
                )?;
                if bad.get() {
                    Err(Error::InvalidIntensity(v))
                } else {
                    Ok(v)
                }
            }
        }
    }

    /// Φ_x^{−1}(u): closed form for the built-in kinds, bracketed bisection on
    /// [0, y_max] for custom intensities.
    pub fn quantile_inverse(&self, x: &Direction, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Err(Error::QuantileOutOfRange(u));
        }
        match self.kind {
            ModelKind::Uniform => Ok(u),
            ModelKind::Polar => {
                let d = self.d as f64;
                Ok((d * u / geometry::gamma_d(self.d)?).powf(1.0 / d))
            }
            ModelKind::Custom => {
                if u == 0.0 {
                    return Ok(0.0);
                }
                let mut hi = self.y_max;
                if self.quantile_forward(x, hi)? < u {
                    return Err(Error::QuantileOutOfRange(u));
                }
                let mut lo = 0.0f64;
                // Monotone bracket halving down to absolute 1e−10 resolution.
                while hi - lo > 1e-10 * hi.max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    if self.quantile_forward(x, mid)? < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }

    /// Φ at a fixed direction, bundling forward and inverse.
    pub fn transform<'a>(&'a self, x: &'a Direction) -> QuantileTransform<'a> {
        QuantileTransform { model: self, x }
    }
}

/// The conditional quantile transformation at a fixed direction.
pub struct QuantileTransform<'a> {
    model: &'a ProcessModel,
    x: &'a Direction,
}

impl QuantileTransform<'_> {
    pub fn forward(&self, y: f64) -> Result<f64> {
        self.model.quantile_forward(self.x, y)
    }

    pub fn inverse(&self, u: f64) -> Result<f64> {
        self.model.quantile_inverse(self.x, u)
    }
}

type FrontierEval = Arc<dyn Fn(&Direction) -> f64 + Send + Sync>;

/// An evaluable frontier E → (0, ∞) with declared bounds 0 < m ≤ f ≤ M.
///
/// The built-ins (`paper`, `constant:<v>`, `fourier:<coeffs>`) depend on the
/// direction only through its azimuth, so they are usable in any dimension.
#[derive(Clone)]
pub struct FrontierFunction {
    eval: FrontierEval,
    lower: f64,
    upper: f64,
    smoothness: String,
    tag: String,
}

impl fmt::Debug for FrontierFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrontierFunction")
            .field("tag", &self.tag)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

impl FrontierFunction {
    /// f(x) = 1 + exp(−cos 3x) on the azimuth; bounds [1 + e^{−1}, 1 + e].
    pub fn paper() -> Self {
        FrontierFunction {
            eval: Arc::new(|x: &Direction| 1.0 + (-(3.0 * x.azimuth()).cos()).exp()),
            lower: 1.0 + (-1.0f64).exp(),
            upper: 1.0 + 1.0f64.exp(),
            smoothness: "analytic".into(),
            tag: "paper".into(),
        }
    }

    pub fn constant(v: f64) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidFrontierBounds { m: v, upper: v });
        }
        Ok(FrontierFunction {
            eval: Arc::new(move |_| v),
            lower: v,
            upper: v,
            smoothness: "constant".into(),
            tag: format!("constant:{v}"),
        })
    }

    /// Trigonometric polynomial a_0 + Σ_j (a_{2j−1} cos(j·az) + a_{2j} sin(j·az)).
    /// Bounds come from the ℓ1 envelope a_0 ± Σ |a_i|, which must stay positive.
    pub fn fourier(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig("fourier frontier needs finite coefficients".into()));
        }
        let spread: f64 = coeffs[1..].iter().map(|a| a.abs()).sum();
        let lower = coeffs[0] - spread;
        let upper = coeffs[0] + spread;
        if lower <= 0.0 {
            return Err(Error::InvalidFrontierBounds { m: lower, upper });
        }
        let c = coeffs.to_vec();
        let tag = format!(
            "fourier:{}",
            c.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
        );
        Ok(FrontierFunction {
            eval: Arc::new(move |x: &Direction| {
                let a = x.azimuth();
                let mut v = c[0];
                for (i, &ci) in c[1..].iter().enumerate() {
                    let j = (i / 2 + 1) as f64;
                    v += if i % 2 == 0 { ci * (j * a).cos() } else { ci * (j * a).sin() };
                }
                v
            }),
            lower,
            upper,
            smoothness: "analytic".into(),
            tag,
        })
    }

    /// A frontier from an arbitrary closure with caller-declared bounds.
    pub fn custom(
        eval: impl Fn(&Direction) -> f64 + Send + Sync + 'static,
        lower: f64,
        upper: f64,
        smoothness: &str,
        tag: &str,
    ) -> Result<Self> {
        if !(lower > 0.0 && lower <= upper && upper.is_finite()) {
            return Err(Error::InvalidFrontierBounds { m: lower, upper });
        }
        Ok(FrontierFunction {
            eval: Arc::new(eval),
            lower,
            upper,
            smoothness: smoothness.into(),
            tag: tag.into(),
        })
    }

    /// Resolves a config tag: `paper`, `constant:<v>` or `fourier:<c0,c1,...>`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        if tag == "paper" {
            return Ok(Self::paper());
        }
        if let Some(v) = tag.strip_prefix("constant:") {
            let v: f64 = v.parse().map_err(|_| Error::UnknownFrontier(tag.into()))?;
            return Self::constant(v);
        }
        if let Some(list) = tag.strip_prefix("fourier:") {
            let coeffs = list
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| Error::UnknownFrontier(tag.into()))?;
            return Self::fourier(&coeffs);
        }
        Err(Error::UnknownFrontier(tag.into()))
    }

    pub fn eval(&self, x: &Direction) -> f64 {
        (self.eval)(x)
    }

    /// Declared lower bound m > 0.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Declared upper bound M.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn smoothness(&self) -> &str {
        &self.smoothness
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }
}

/// g = Φ_x ∘ f, the frontier of the homogenized process over
/// G = {(x, v): 0 ≤ v ≤ g(x)}.
///
/// Bounds are the Φ-images of m and M. For the built-in kinds Φ_x does not
/// depend on x, making them exact; custom-kind bounds are taken at the zero
/// direction and are indicative only.
pub fn homogenized_frontier(model: &ProcessModel, f: &FrontierFunction) -> FrontierFunction {
    let x0 = Direction::zero(model.dimension());
    let lower = model.quantile_forward(&x0, f.lower()).unwrap_or(f64::NAN);
    let upper = model.quantile_forward(&x0, f.upper()).unwrap_or(f64::NAN);
    let m = model.clone();
    let inner = f.clone();
    FrontierFunction {
        eval: Arc::new(move |x: &Direction| {
            m.quantile_forward(x, inner.eval(x)).unwrap_or(f64::NAN)
        }),
        lower,
        upper,
        smoothness: f.smoothness.clone(),
        tag: format!("homogenized({})", f.tag),
    }
}
