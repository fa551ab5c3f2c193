//! Closed-form fluctuating-hydrodynamics quantities: drift currents, the
//! current Jacobian and its eigenstructure, Hessians, mode-coupling matrices,
//! universality classification, the normal-mode constants `(D1, D2, v)` and
//! the limit coefficients `(lambda, sigma^2)` per mode.
//!
//! All matrices are kept in "field units": the common `1/N^gamma` prefactor
//! is factored out and carried separately as [`CouplingReport::scale`], so
//! zero/nonzero structure (which drives the classification) is independent
//! of the ring size.

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Small dense 2x2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Mat2 {
        Mat2([[0.0; 2]; 2])
    }

    pub fn identity() -> Mat2 {
        Mat2([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    pub fn transpose(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0], a[1][0]], [a[0][1], a[1][1]]])
    }

    pub fn scaled(&self, s: f64) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let a = &self.0;
        Some(Mat2([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]))
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.0[0][1] - self.0[1][0]).abs() <= tol
    }
}

/// A point in the two-dimensional simplex of conserved densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub rho_a: f64,
    pub rho_b: f64,
}

impl DensityPoint {
    pub fn new(rho_a: f64, rho_b: f64) -> Result<DensityPoint> {
        if !(0.0..=1.0).contains(&rho_a)
            || !(0.0..=1.0).contains(&rho_b)
            || rho_a + rho_b > 1.0 + 1e-12
        {
            return Err(Error::BadDensities { rho_a, rho_b });
        }
        Ok(DensityPoint { rho_a, rho_b })
    }

    pub fn equal_thirds() -> DensityPoint {
        DensityPoint { rho_a: 1.0 / 3.0, rho_b: 1.0 / 3.0 }
    }

    pub fn rho_c(&self) -> f64 {
        1.0 - self.rho_a - self.rho_b
    }
}

/// Field differences `(E_A - E_C, E_B - E_C)`, the natural drift parameters.
pub fn field_gaps(params: &ModelParams) -> (f64, f64) {
    let e = params.field();
    (e[0] - e[2], e[1] - e[2])
}

/// Drift part of the macroscopic current at `rho`, in field units
/// (multiply by `1/N^gamma` for the lattice value).
pub fn drift_current_field_units(rho: DensityPoint, params: &ModelParams) -> [f64; 2] {
    let (ga, gb) = field_gaps(params);
    let (ra, rb) = (rho.rho_a, rho.rho_b);
    [
        ra * (1.0 - ra) * ga - ra * rb * gb,
        rb * (1.0 - rb) * gb - ra * rb * ga,
    ]
}

/// Expected instantaneous current (drift part only; gradient terms belong to
/// the hydrodynamic solver).
pub fn average_current(rho: DensityPoint, params: &ModelParams) -> [f64; 2] {
    let scale = 1.0 / params.n_pow_gamma();
    let j = drift_current_field_units(rho, params);
    [j[0] * scale, j[1] * scale]
}

/// Jacobian of the drift current at `rho`, in field units.
pub fn jacobian_field_units(rho: DensityPoint, params: &ModelParams) -> Mat2 {
    let (ga, gb) = field_gaps(params);
    let (ra, rb) = (rho.rho_a, rho.rho_b);
    Mat2([
        [(1.0 - 2.0 * ra) * ga - rb * gb, -ra * gb],
        [-rb * ga, -ra * ga + (1.0 - 2.0 * rb) * gb],
    ])
}

/// Hessians of the two drift-current components. Density independent.
pub fn hessians_field_units(params: &ModelParams) -> (Mat2, Mat2) {
    let (ga, gb) = field_gaps(params);
    (
        Mat2([[-2.0 * ga, -gb], [-gb, 0.0]]),
        Mat2([[0.0, -ga], [-ga, -2.0 * gb]]),
    )
}

/// Mode-velocity splitting `(2/3) sqrt(gA^2 + gB^2 - gA gB)` at equal
/// densities, in field units.
pub fn delta_equal_density(params: &ModelParams) -> f64 {
    let (ga, gb) = field_gaps(params);
    2.0 / 3.0 * (ga * ga + gb * gb - ga * gb).sqrt()
}

/// The linear-combination constants `c_pm = (E_A - E_B) +- (3/2) delta`.
pub fn c_constants(params: &ModelParams) -> (f64, f64) {
    let e = params.field();
    let d = delta_equal_density(params);
    (e[0] - e[1] + 1.5 * d, e[0] - e[1] - 1.5 * d)
}

/// Eigen-decomposition of a 2x2 current Jacobian.
///
/// `r_inv` has the eigenvectors as columns, normalized to second component 1
/// where possible (first component 1 when the eigenvector is horizontal);
/// `r * j * r_inv = diag(v_plus, v_minus)`.
#[derive(Debug, Clone, Copy)]
pub struct EigenStructure {
    pub v_plus: f64,
    pub v_minus: f64,
    pub tau_plus: [f64; 2],
    pub tau_minus: [f64; 2],
    pub r: Mat2,
    pub r_inv: Mat2,
}

pub fn eigen_structure(j: &Mat2) -> Result<EigenStructure> {
    let a = &j.0;
    let tr = a[0][0] + a[1][1];
    let det = j.det();
    let disc = tr * tr - 4.0 * det;
    let scale = j.max_abs().max(1.0);
    if disc < -1e-12 * scale * scale {
        return Err(Error::NonHyperbolic(disc));
    }
    let sq = disc.max(0.0).sqrt();
    let v_plus = 0.5 * (tr + sq);
    let v_minus = 0.5 * (tr - sq);

    let eigenvector = |v: f64| -> [f64; 2] {
        // Solve (J - v) tau = 0, preferring the better-conditioned row.
        let r1 = (a[0][0] - v, a[0][1]);
        let r2 = (a[1][0], a[1][1] - v);
        let tau = if r2.0.abs() >= r1.0.abs().max(1e-300) && r2.0.abs() > 0.0 {
            [(v - a[1][1]) / a[1][0], 1.0]
        } else if r1.0.abs() > 0.0 {
            [-r1.1 / r1.0, 1.0]
        } else if r1.1.abs() > 0.0 || r2.1.abs() > 0.0 {
            // row forces second component zero: horizontal eigenvector
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        };
        tau
    };

    let (tau_plus, tau_minus) = if sq <= 1e-14 * scale {
        // Fully degenerate point (symmetric dynamics): documented convention.
        ([-1.0, 1.0], [1.0, 1.0])
    } else {
        (eigenvector(v_plus), eigenvector(v_minus))
    };

    let r_inv = Mat2([[tau_plus[0], tau_minus[0]], [tau_plus[1], tau_minus[1]]]);
    let r = r_inv
        .inverse()
        .ok_or_else(|| Error::NonHyperbolic(r_inv.det()))?;
    Ok(EigenStructure { v_plus, v_minus, tau_plus, tau_minus, r, r_inv })
}

/// Quadratic coefficient of mode `j`'s current in normal coordinates,
/// `(1/2) R^{-T} H^j R^{-1}`.
fn mode_quadratic(h: &Mat2, r_inv: &Mat2) -> Mat2 {
    r_inv.transpose().mul(h).mul(r_inv).scaled(0.5)
}

/// Mode-coupling matrices of the two normal modes.
///
/// Normalization is pinned by the equal-strength case
/// `E_A = E_B = E_C + E`, where `G1 = (1/2) [[0, -E], [-E, 0]]` and
/// `G2 = [[0, 0], [0, -E]]` (field units).
pub fn coupling_matrices(r: &Mat2, r_inv: &Mat2, h1: &Mat2, h2: &Mat2) -> (Mat2, Mat2) {
    let k1 = mode_quadratic(h1, r_inv);
    let k2 = mode_quadratic(h2, r_inv);
    let g = |i: usize| {
        k1.scaled(r.0[i][0])
            .add(&k2.scaled(r.0[i][1]))
            .scaled(0.5)
    };
    (g(0), g(1))
}

/// Universality class of one normal mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeClass {
    /// Diffusive fluctuations, dynamical exponent z = 2.
    Ew,
    /// Self-coupled mode, z = 3/2.
    Kpz,
    /// Cross-coupled only; z from the fixed-point recursion.
    Levy(f64),
}

pub const GOLDEN_MEAN: f64 = 1.618033988749894848;

/// Classify both modes from the diagonal structure of their coupling
/// matrices. `g1`, `g2` must be symmetric; zero tests use absolute tolerance
/// `1e-12` relative to the largest entry.
pub fn classify_modes(g1: &Mat2, g2: &Mat2) -> (ModeClass, ModeClass) {
    let tol = 1e-12 * g1.max_abs().max(g2.max_abs()).max(1.0);
    let self1 = g1.0[0][0].abs() > tol;
    let self2 = g2.0[1][1].abs() > tol;
    let cross1 = g1.0[1][1].abs() > tol; // mode 1 driven by mode 2
    let cross2 = g2.0[0][0].abs() > tol; // mode 2 driven by mode 1

    let class = |self_c: bool, cross_c: bool, other_self: bool, other_cross: bool| {
        if self_c {
            ModeClass::Kpz
        } else if !cross_c {
            ModeClass::Ew
        } else if other_self {
            // driven by a KPZ mode: z = 1 + 1/(3/2)
            ModeClass::Levy(5.0 / 3.0)
        } else if !other_cross {
            // driven by a diffusive mode: z = 1 + 1/2
            ModeClass::Levy(1.5)
        } else {
            // mutually driven: fixed point of z = 1 + 1/z
            ModeClass::Levy(GOLDEN_MEAN)
        }
    };
    (
        class(self1, cross1, self2, cross2),
        class(self2, cross2, self1, cross1),
    )
}

/// Successive Fibonacci-ratio exponents `2, 3/2, 5/3, 8/5, ...` converging
/// to the golden mean. Returned as `(numerator, denominator)` pairs.
pub fn fibonacci_exponents(depth: usize) -> Vec<(u64, u64)> {
    assert!(depth >= 1 && depth <= 88, "depth out of u64 Fibonacci range");
    let mut fib = vec![1u64, 1];
    while fib.len() < depth + 3 {
        let k = fib.len();
        fib.push(fib[k - 1] + fib[k - 2]);
    }
    (0..depth).map(|i| (fib[i + 2], fib[i + 1])).collect()
}

/// Which structural case the field strengths realize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// `E_A = E_B`
    I,
    /// `E_B = E_C`
    II,
    /// all exchange rates asymmetric (`E_B != E_C`, `E_A != E_C`)
    III,
}

impl CaseTag {
    /// Validate `params` against this tag.
    pub fn check(self, params: &ModelParams) -> Result<()> {
        let e = params.field();
        let tol = 1e-12 * e.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let fail = |reason: String| {
            Err(Error::CaseMismatch { case: self.name(), reason })
        };
        match self {
            CaseTag::I => {
                if (e[0] - e[1]).abs() > tol {
                    return fail(format!("requires E_A = E_B, got {} vs {}", e[0], e[1]));
                }
            }
            CaseTag::II => {
                if (e[1] - e[2]).abs() > tol {
                    return fail(format!("requires E_B = E_C, got {} vs {}", e[1], e[2]));
                }
            }
            CaseTag::III => {
                if (e[1] - e[2]).abs() <= tol {
                    return fail("requires E_B != E_C".into());
                }
                if (e[0] - e[2]).abs() <= tol {
                    return fail("requires E_A != E_C".into());
                }
            }
        }
        Ok(())
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::I => "I",
            CaseTag::II => "II",
            CaseTag::III => "III",
        }
    }

    /// Infer the tag from field strengths, preferring I over II over III.
    pub fn infer(params: &ModelParams) -> Option<CaseTag> {
        for tag in [CaseTag::I, CaseTag::II, CaseTag::III] {
            if tag.check(params).is_ok() {
                return Some(tag);
            }
        }
        None
    }
}

/// Which of the two normal modes a field tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeLabel {
    Plus,
    Minus,
}

impl ModeLabel {
    pub fn name(self) -> &'static str {
        match self {
            ModeLabel::Plus => "plus",
            ModeLabel::Minus => "minus",
        }
    }
}

/// Constants defining one travelling normal-mode field
/// `Z_t(f) = D1 Y^A(T f) + D2 Y^B(T f)` in a frame moving `v N^a t` sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModeSpec {
    pub d1: f64,
    pub d2: f64,
    /// Frame velocity (already includes the `1/N^gamma` factor).
    pub v: f64,
    pub label: ModeLabel,
    pub case: CaseTag,
}

impl NormalModeSpec {
    /// Residuals of the two-equation linear system the constants must solve.
    pub fn system_residual(&self, params: &ModelParams) -> (f64, f64) {
        let e = params.field();
        let ng = params.n_pow_gamma();
        let r1 = (self.d1 * (e[1] - e[0]) + self.d2 * (e[0] - e[2])) / (3.0 * ng) + self.d1 * self.v;
        let r2 = (self.d1 * (e[1] - e[2]) - self.d2 * (e[1] - e[0])) / (3.0 * ng) + self.d2 * self.v;
        (r1, r2)
    }

    /// Fixed-time variance of the mode variable, `(2/9)(D1^2 + D2^2 - D1 D2)`.
    pub fn fixed_time_variance(&self) -> f64 {
        mode_variance(self.d1, self.d2)
    }
}

pub fn mode_variance(d1: f64, d2: f64) -> f64 {
    2.0 / 9.0 * (d1 * d1 + d2 * d2 - d1 * d2)
}

/// The `(plus, minus)` normal-mode constants for `case` at equal densities.
pub fn normal_mode_spec(
    case: CaseTag,
    params: &ModelParams,
) -> Result<(NormalModeSpec, NormalModeSpec)> {
    case.check(params)?;
    let e = params.field();
    let ng = params.n_pow_gamma();
    let (d2_plus, d2_minus, v_plus) = match case {
        CaseTag::I => {
            let strength = e[0] - e[2];
            (-1.0, 1.0, strength / (3.0 * ng))
        }
        CaseTag::II => {
            let strength = e[2] - e[0];
            (2.0, 0.0, strength / (3.0 * ng))
        }
        CaseTag::III => {
            let (c_plus, c_minus) = c_constants(params);
            let ga = e[0] - e[2];
            let d = delta_equal_density(params);
            (c_minus / ga, c_plus / ga, d / (2.0 * ng))
        }
    };
    let plus = NormalModeSpec { d1: 1.0, d2: d2_plus, v: v_plus, label: ModeLabel::Plus, case };
    let minus = NormalModeSpec { d1: 1.0, d2: d2_minus, v: -v_plus, label: ModeLabel::Minus, case };
    for spec in [&plus, &minus] {
        let (r1, r2) = spec.system_residual(params);
        let tol = 1e-12 * (1.0 + e.iter().fold(0.0f64, |m, v| m.max(v.abs())) / ng);
        if r1.abs() > tol || r2.abs() > tol {
            return Err(Error::BadParameter(format!(
                "normal-mode system residual too large: ({r1:.3e}, {r2:.3e})"
            )));
        }
    }
    Ok((plus, minus))
}

/// Limit coefficients of the mode equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremCoefficients {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub sigma2_plus: f64,
    pub sigma2_minus: f64,
}

/// Nonlinearity and noise coefficients per mode. Defined for
/// `gamma >= 1/2`; the nonlinearity vanishes for `gamma > 1/2`.
pub fn theorem_coefficients(case: CaseTag, params: &ModelParams) -> Result<TheoremCoefficients> {
    case.check(params)?;
    let gamma = params.gamma();
    if gamma < 0.5 {
        return Err(Error::OutOfProvenRegime(gamma));
    }
    let e = params.field();
    let at_half = gamma == 0.5;
    match case {
        CaseTag::I | CaseTag::II => Ok(TheoremCoefficients {
            lambda_plus: 0.0,
            lambda_minus: if at_half { e[2] - e[0] } else { 0.0 },
            sigma2_plus: 2.0 / 3.0,
            sigma2_minus: 2.0 / 9.0,
        }),
        CaseTag::III => {
            let ga = e[0] - e[2];
            let gb = e[1] - e[2];
            let d = delta_equal_density(params);
            let (c_plus, c_minus) = c_constants(params);
            let sigma2 = |c_opp: f64| {
                2.0 / 9.0 * (1.0 + (c_opp / ga).powi(2) - c_opp / ga)
            };
            Ok(TheoremCoefficients {
                lambda_plus: if at_half { -(ga / (3.0 * d)) * (c_plus - gb) } else { 0.0 },
                lambda_minus: if at_half { -(ga / (3.0 * d)) * (gb - c_minus) } else { 0.0 },
                sigma2_plus: sigma2(c_minus),
                sigma2_minus: sigma2(c_plus),
            })
        }
    }
}

/// Everything the closed-form layer derives at one density point.
#[derive(Debug, Clone)]
pub struct CouplingReport {
    pub rho: DensityPoint,
    /// Multiply field-unit quantities by this (`1/N^gamma`) for lattice values.
    pub scale: f64,
    pub j: Mat2,
    pub delta: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    pub tau_plus: [f64; 2],
    pub tau_minus: [f64; 2],
    pub r: Mat2,
    pub r_inv: Mat2,
    pub h1: Mat2,
    pub h2: Mat2,
    pub g1: Mat2,
    pub g2: Mat2,
    pub class_plus: ModeClass,
    pub class_minus: ModeClass,
}

pub fn coupling_report(rho: DensityPoint, params: &ModelParams) -> Result<CouplingReport> {
    let j = jacobian_field_units(rho, params);
    let eig = eigen_structure(&j)?;
    let (h1, h2) = hessians_field_units(params);
    let (g1, g2) = coupling_matrices(&eig.r, &eig.r_inv, &h1, &h2);
    let (class_plus, class_minus) = classify_modes(&g1, &g2);
    Ok(CouplingReport {
        rho,
        scale: 1.0 / params.n_pow_gamma(),
        j,
        delta: eig.v_plus - eig.v_minus,
        v_plus: eig.v_plus,
        v_minus: eig.v_minus,
        tau_plus: eig.tau_plus,
        tau_minus: eig.tau_minus,
        r: eig.r,
        r_inv: eig.r_inv,
        h1,
        h2,
        g1,
        g2,
        class_plus,
        class_minus,
    })
}
