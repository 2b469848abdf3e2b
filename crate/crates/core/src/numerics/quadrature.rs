//! Adaptive Gauss–Kronrod (10/21) quadrature with a global error budget.
//!
//! Semi-infinite pieces are mapped onto `[0, 1)` with `x = a ± t/(1-t)`;
//! callers with piecewise-smooth integrands pass the kink locations as
//! breakpoints so that no panel straddles a kink.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions == 0 {
            return Err(invalid(format!(
                "quadrature spec needs abs_tol > 0, rel_tol > 0, max_subdivisions >= 1 \
                 (got {abs_tol}, {rel_tol}, {max_subdivisions})"
            )));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
        }
    }
}

/// An integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Change of variable applied to a panel.
#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `x = origin + t/(1-t)`, `t ∈ [0, 1)`.
    Upper(f64),
    /// `x = origin - t/(1-t)`, `t ∈ [0, 1)`.
    Lower(f64),
}

impl Map {
    #[inline]
    fn eval<F: Fn(f64) -> f64>(&self, f: &F, t: f64) -> f64 {
        match *self {
            Map::Identity => f(t),
            Map::Upper(a) => {
                let s = 1.0 / (1.0 - t);
                f(a + t * s) * s * s
            }
            Map::Lower(b) => {
                let s = 1.0 / (1.0 - t);
                f(b - t * s) * s * s
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    map: Map,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, map: Map, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = map.eval(f, center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = map.eval(f, center - dx);
        let f2 = map.eval(f, center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    // QUADPACK error heuristic.
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Panel {
        lo,
        hi,
        map,
        value,
        error,
    }
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    seeds: Vec<(Map, f64, f64)>,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    let mut heap: BinaryHeap<Panel> = seeds
        .into_iter()
        .map(|(map, lo, hi)| gk21(f, map, lo, hi))
        .collect();
    let mut subdivisions = 0usize;
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if !value.is_finite() {
            return Err(Error::Numeric(format!("integrand produced {value}")));
        }
        if error <= spec.target(value) {
            return Ok(Integral {
                value,
                abs_error: error,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Panel can no longer be split in floating point.
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
            });
        }
        heap.push(gk21(f, worst.map, worst.lo, mid));
        heap.push(gk21(f, worst.map, mid, worst.hi));
        subdivisions += 1;
    }
}

fn seed_panels(lower: f64, upper: f64, out: &mut Vec<(Map, f64, f64)>) -> Result<()> {
    if lower.is_nan() || upper.is_nan() {
        return Err(invalid("integration bound is NaN"));
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => out.push((Map::Identity, lower, upper)),
        (true, false) if upper > 0.0 => out.push((Map::Upper(lower), 0.0, 1.0)),
        (false, true) if lower < 0.0 => out.push((Map::Lower(upper), 0.0, 1.0)),
        (false, false) if lower < 0.0 && upper > 0.0 => {
            out.push((Map::Lower(0.0), 0.0, 1.0));
            out.push((Map::Upper(0.0), 0.0, 1.0));
        }
        _ => {
            return Err(invalid(format!(
                "unsupported integration range [{lower}, {upper}]"
            )))
        }
    }
    Ok(())
}

/// `∫ f` over `[lower, upper]`; either bound may be infinite.
pub fn integrate<F>(f: F, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_piecewise(f, &[lower, upper], spec)
}

/// `∫ f` over `[breaks[0], breaks[last]]`, never placing a panel across an
/// interior breakpoint. The outer breakpoints may be infinite.
pub fn integrate_piecewise<F>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    Ok(integrate_piecewise_detailed(f, breaks, spec)?.value)
}

pub fn integrate_piecewise_detailed<F>(
    f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if breaks.len() < 2 {
        return Err(invalid("need at least two breakpoints"));
    }
    if breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid(format!(
            "breakpoints must be strictly increasing: {breaks:?}"
        )));
    }
    let mut seeds = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        seed_panels(w[0], w[1], &mut seeds)?;
    }
    adaptive(&f, seeds, spec)
}
