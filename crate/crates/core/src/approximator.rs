//! Random-feature fits of invariant targets by shallow networks built on a basis-map family.
//!
//! Inner weights are sampled once and frozen; only the outer layer is fitted,
//! by ridge-regularized least squares.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::rational_to_f64;
use crate::polynomials::{is_invariant, MultiPoly};
use crate::representations::BasisMapFamily;

/// Constants locked from the pre-build calibration run.
pub mod thresholds {
    use super::Activation;

    /// Held-out rms that the PointNet fit of `(x1+x2+x3)^3` must beat at width 64.
    pub const SUCCESS_RMS: f64 = 2e-3;
    /// Minimum ratio of C1 held-out rms at width 512 to width 8.
    pub const FAILURE_RATIO_FLOOR: f64 = 0.5;
    pub const SUCCESS_WIDTH: usize = 64;
    pub const FAILURE_WIDTHS: (usize, usize) = (8, 512);
    pub const SEEDS: [u64; 11] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
    pub const ACTIVATION: Activation = Activation::Sigmoid;
    pub const MIN_SAMPLES: usize = 2000;
}

/// Size of the low-discrepancy held-out grid.
pub const HELD_OUT_POINTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn eval(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::InvalidParameters(format!("unknown activation {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub width: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub activation: Activation,
    pub inner_scale: f64,
    pub ridge_lambda: f64,
    pub domain_box: Vec<(f64, f64)>,
}

impl FitConfig {
    /// Defaults on `[-1, 1]^dim`: ReLU, inner scale 3, `λ = 1e-10`, `max(2000, 10h)` samples.
    pub fn new(width: usize, dim: usize) -> Self {
        FitConfig {
            width,
            sample_count: thresholds::MIN_SAMPLES.max(10 * width),
            seed: 0,
            activation: Activation::Relu,
            inner_scale: 3.0,
            ridge_lambda: 1e-10,
            domain_box: vec![(-1.0, 1.0); dim],
        }
    }

    pub fn with_width(&self, width: usize) -> Self {
        FitConfig { width, sample_count: self.sample_count.max(10 * width), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameters(m.into()));
        if self.width == 0 {
            return bad("width must be at least 1");
        }
        if self.sample_count < 10 * self.width {
            return bad("sample_count must be at least 10 * width");
        }
        if !(self.inner_scale.is_finite() && self.inner_scale > 0.0) {
            return bad("inner_scale must be positive");
        }
        if !(self.ridge_lambda.is_finite() && self.ridge_lambda >= 0.0) {
            return bad("ridge_lambda must be nonnegative");
        }
        if self.domain_box.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return bad("domain box intervals must be finite and nonempty");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub family_id: String,
    pub width: usize,
    pub seed: u64,
    pub train_error: f64,
    pub rms_error: f64,
    pub max_error: f64,
}

/// Frozen inner parameters: `b[j]` in `ℝ^m` and bias `c[j]` per hidden unit.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerParams {
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

/// Float copy of a basis-map family in both layouts used by the two feature routes.
#[derive(Clone, Debug)]
struct FloatFamily {
    /// `per_map[i][t][k]`: row `t` of `φ_i`.
    per_map: Vec<Vec<Vec<f64>>>,
    /// `per_basis[t][i][k]`: row `i` of `φ^t`.
    per_basis: Vec<Vec<Vec<f64>>>,
    n: usize,
}

impl FloatFamily {
    fn new(family: &BasisMapFamily) -> Self {
        let per_map: Vec<Vec<Vec<f64>>> = family
            .maps
            .iter()
            .map(|phi| (0..phi.rows()).map(|t| phi.row(t).iter().map(rational_to_f64).collect()).collect())
            .collect();
        let per_basis = family
            .reconstruct_linear_basis()
            .iter()
            .map(|phi| (0..phi.rows()).map(|i| phi.row(i).iter().map(rational_to_f64).collect()).collect())
            .collect();
        FloatFamily { per_map, per_basis, n: family.source_dim }
    }

    fn m(&self) -> usize {
        self.per_basis.len()
    }
}

#[inline]
fn dot(a: &[f64], x: &[f64]) -> f64 {
    let mut s = 0.0;
    for (ak, xk) in a.iter().zip(x) {
        s += ak * xk;
    }
    s
}

/// Samples inner weights uniformly in `[-s, s]^m`; each bias is uniform on
/// `[-R, R]`, `R` bounding `|Σ_t b_t φ_i^t(x)|` over the box for every `i`.
pub fn sample_inner_params(family: &BasisMapFamily, cfg: &FitConfig) -> InnerParams {
    let ff = FloatFamily::new(family);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = ff.m();
    let s = cfg.inner_scale;
    let reach: Vec<f64> = cfg.domain_box.iter().map(|&(lo, hi)| lo.abs().max(hi.abs())).collect();
    let mut b = Vec::with_capacity(cfg.width);
    let mut c = Vec::with_capacity(cfg.width);
    for _ in 0..cfg.width {
        let bj: Vec<f64> = (0..m).map(|_| rng.gen_range(-s..=s)).collect();
        let r = ff
            .per_map
            .iter()
            .map(|rows| {
                (0..ff.n).map(|k| (0..m).map(|t| bj[t] * rows[t][k]).sum::<f64>().abs() * reach[k]).sum::<f64>()
            })
            .fold(0.0, f64::max);
        let cj = if r > 0.0 { rng.gen_range(-r..=r) } else { 0.0 };
        b.push(bj);
        c.push(cj);
    }
    InnerParams { b, c }
}

/// Uniform training points in the box, from a stream independent of the inner parameters.
pub fn sample_points(cfg: &FitConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    (0..cfg.sample_count).map(|_| cfg.domain_box.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect()).collect()
}

fn primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut k = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= k).all(|&p| k % p != 0) {
            out.push(k);
        }
        k += 1;
    }
    out
}

/// Halton points `1..=count` in the prime bases, mapped affinely into the box.
pub fn halton_grid(count: usize, domain_box: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let bases = primes(domain_box.len());
    (1..=count as u64)
        .map(|i| {
            bases
                .iter()
                .zip(domain_box)
                .map(|(&base, &(lo, hi))| {
                    let (mut f, mut r, mut k) = (1.0, 0.0, i);
                    while k > 0 {
                        f /= base as f64;
                        r += f * (k % base) as f64;
                        k /= base;
                    }
                    lo + (hi - lo) * r
                })
                .collect()
        })
        .collect()
}

/// Network route: `ψ_j(x) = Σ_i σ(Σ_t b_{j,t} (φ^t x)_i + c_j)`, one layer output `φ^t x` at a time.
pub fn network_features_with(family: &BasisMapFamily, params: &InnerParams, act: Activation, points: &[Vec<f64>]) -> DMatrix<f64> {
    let ff = FloatFamily::new(family);
    let ell = family.len();
    let h = params.c.len();
    let mut out = DMatrix::zeros(points.len(), h);
    let mut layer = vec![vec![0.0; ell]; ff.m()];
    for (r, x) in points.iter().enumerate() {
        for (t, phi) in ff.per_basis.iter().enumerate() {
            for i in 0..ell {
                layer[t][i] = dot(&phi[i], x);
            }
        }
        for j in 0..h {
            let mut acc = 0.0;
            for i in 0..ell {
                let mut pre = 0.0;
                for (t, out_t) in layer.iter().enumerate() {
                    pre += params.b[j][t] * out_t[i];
                }
                acc += act.eval(pre + params.c[j]);
            }
            out[(r, j)] = acc;
        }
    }
    out
}

/// Ridge route: `Σ_i σ(w · φ_i(x) + c)`, evaluating each basis map as a whole.
pub fn ridge_superposition_features_with(
    family: &BasisMapFamily,
    params: &InnerParams,
    act: Activation,
    points: &[Vec<f64>],
) -> DMatrix<f64> {
    let ff = FloatFamily::new(family);
    let h = params.c.len();
    let mut out = DMatrix::zeros(points.len(), h);
    for (r, x) in points.iter().enumerate() {
        let images: Vec<Vec<f64>> = ff.per_map.iter().map(|rows| rows.iter().map(|row| dot(row, x)).collect()).collect();
        for j in 0..h {
            out[(r, j)] = images.iter().map(|z| act.eval(dot(&params.b[j], z) + params.c[j])).fold(0.0, |a, v| a + v);
        }
    }
    out
}

pub fn network_features(family: &BasisMapFamily, cfg: &FitConfig, points: &[Vec<f64>]) -> DMatrix<f64> {
    network_features_with(family, &sample_inner_params(family, cfg), cfg.activation, points)
}

pub fn ridge_superposition_features(family: &BasisMapFamily, cfg: &FitConfig, points: &[Vec<f64>]) -> DMatrix<f64> {
    ridge_superposition_features_with(family, &sample_inner_params(family, cfg), cfg.activation, points)
}

fn with_bias_column(features: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = features.shape();
    let mut out = features.clone().resize_horizontally(cols + 1, 0.0);
    for r in 0..rows {
        out[(r, cols)] = 1.0;
    }
    out
}

/// `argmin_a |Φ a - y|^2 + λ |a|^2` through Householder QR of `[Φ; √λ I]`.
pub fn ridge_solve(phi: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let (rows, cols) = phi.shape();
    let mut a = phi.clone().resize_vertically(rows + cols, 0.0);
    let root = lambda.sqrt();
    for k in 0..cols {
        a[(rows + k, k)] = root;
    }
    let mut rhs = y.clone().resize_vertically(rows + cols, 0.0);
    let qr = a.qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if lambda == 0.0 && r.diagonal().iter().any(|v| v.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::SingularSystem);
    }
    qr.q_tr_mul(&mut rhs);
    let top = rhs.rows(0, cols).into_owned();
    r.solve_upper_triangular(&top).ok_or(Error::SingularSystem)
}

fn rms(v: &DVector<f64>) -> f64 {
    (v.iter().map(|e| e * e).sum::<f64>() / v.len() as f64).sqrt()
}

fn check_fit_inputs(target: &MultiPoly, family: &BasisMapFamily, cfg: &FitConfig) -> Result<()> {
    cfg.validate()?;
    if target.num_vars() != family.source_dim {
        return Err(Error::DimensionMismatch { expected: family.source_dim, found: target.num_vars() });
    }
    if cfg.domain_box.len() != family.source_dim {
        return Err(Error::DimensionMismatch { expected: family.source_dim, found: cfg.domain_box.len() });
    }
    if !is_invariant(target, &family.group)? {
        return Err(Error::NotInvariant);
    }
    Ok(())
}

fn fit_on_grid(target: &MultiPoly, family: &BasisMapFamily, cfg: &FitConfig, grid: &[Vec<f64>]) -> Result<FitResult> {
    check_fit_inputs(target, family, cfg)?;
    let params = sample_inner_params(family, cfg);
    let train = sample_points(cfg);
    let phi = with_bias_column(&network_features_with(family, &params, cfg.activation, &train));
    let y = DVector::from_iterator(train.len(), train.iter().map(|x| target.evaluate_f64(x)));
    let coef = ridge_solve(&phi, &y, cfg.ridge_lambda)?;
    let train_res = &phi * &coef - &y;
    let test_phi = with_bias_column(&network_features_with(family, &params, cfg.activation, grid));
    let test_y = DVector::from_iterator(grid.len(), grid.iter().map(|x| target.evaluate_f64(x)));
    let test_res = &test_phi * &coef - &test_y;
    let result = FitResult {
        family_id: family.name.clone(),
        width: cfg.width,
        seed: cfg.seed,
        train_error: rms(&train_res),
        rms_error: rms(&test_res),
        max_error: test_res.amax(),
    };
    if !(result.train_error.is_finite() && result.rms_error.is_finite() && result.max_error.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(result)
}

/// Fits the outer layer and reports train rms plus rms and max error on the held-out grid.
pub fn fit(target: &MultiPoly, family: &BasisMapFamily, cfg: &FitConfig) -> Result<FitResult> {
    fit_on_grid(target, family, cfg, &halton_grid(HELD_OUT_POINTS, &cfg.domain_box))
}

/// One fit per width on a shared held-out grid; sample counts grow to `10 * width` when needed.
pub fn error_curve(target: &MultiPoly, family: &BasisMapFamily, widths: &[usize], cfg: &FitConfig) -> Result<Vec<FitResult>> {
    if widths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameters("widths must be strictly increasing".into()));
    }
    let grid = halton_grid(HELD_OUT_POINTS, &cfg.domain_box);
    widths.par_iter().map(|&w| fit_on_grid(target, family, &cfg.with_width(w), &grid)).collect()
}

/// Fits across seeds in parallel, results in seed order.
pub fn fit_seeds(target: &MultiPoly, family: &BasisMapFamily, cfg: &FitConfig, seeds: &[u64]) -> Result<Vec<FitResult>> {
    let grid = halton_grid(HELD_OUT_POINTS, &cfg.domain_box);
    seeds.par_iter().map(|&seed| fit_on_grid(target, family, &FitConfig { seed, ..cfg.clone() }, &grid)).collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

pub fn curve_to_csv(results: &[FitResult]) -> String {
    let mut out = String::from("width,train_rms,test_rms,test_max,seed\n");
    for r in results {
        out.push_str(&format!("{},{:e},{:e},{:e},{}\n", r.width, r.train_error, r.rms_error, r.max_error, r.seed));
    }
    out
}
