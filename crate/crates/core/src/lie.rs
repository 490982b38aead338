//! Towers of iterated Lie derivatives `Psi(z) = (L_X F(z), ..., L_X^m F(z))`.
//!
//! Entry `k` of the tower equals `(F o gamma)^(k)(0)` for the solution
//! `gamma` of `X` through `z`, so a solution along which `F` is constant stays
//! in the zero set of `Psi`. Two independent routes compute the tower:
//! [`psi_tower`] iterates [`lie_derivative`] in multivariate jet arithmetic,
//! [`psi_along_flow`] propagates the Taylor series of `gamma(t)` itself.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Observable, VectorField};
use crate::jet::{JetField, MonomialBasis, MultiIndex, TruncatedJet};
use crate::scalar::{factorial, Coeff, Series};

/// Relative SVD cutoff used for numerical rank.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_TOL_EQ: f64 = 1e-9;
pub const DEFAULT_TOL_CRIT: f64 = 1e-9;

/// Default tower order for an `n`-dimensional phase space.
pub fn default_tower_order(phase_dim: usize) -> usize {
    phase_dim + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaariVector {
    pub values: Vec<f64>,
    pub order: usize,
    pub base_point: Vec<f64>,
}

impl SaariVector {
    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `L_X F = sum_i (d_i F) X^i`, valid (and returned) to degree `deg F - 1`.
pub fn lie_derivative(f: &TruncatedJet, x: &JetField) -> Result<TruncatedJet> {
    if f.dim() != x.dim() {
        return Err(Error::Combinability(format!(
            "observable dimension {} vs field dimension {}",
            f.dim(),
            x.dim()
        )));
    }
    if f.base_point() != x.base_point() {
        return Err(Error::Combinability(format!(
            "base point {:?} vs {:?}",
            f.base_point(),
            x.base_point()
        )));
    }
    if f.degree() == 0 {
        return Ok(f.scale(0.0));
    }
    let out_degree = f.degree() - 1;
    if x.degree() < out_degree {
        return Err(Error::DegreeDeficit {
            required_f: f.degree(),
            required_x: out_degree,
            got_f: f.degree(),
            got_x: x.degree(),
        });
    }
    let mut acc = TruncatedJet::zero(out_degree, f.base_point())?;
    for (axis, xi) in x.components().iter().enumerate() {
        let xi = xi.truncate(out_degree);
        if xi.coeffs().iter().all(|&c| c == 0.0) {
            continue;
        }
        let df = f.partial(axis)?;
        acc = acc.try_add(&df.try_mul(&xi)?)?;
    }
    Ok(acc)
}

fn check_tower_degrees(f_degree: usize, x_degree: usize, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidInput("tower order must be at least 1".into()));
    }
    if f_degree < m || x_degree + 1 < m {
        return Err(Error::DegreeDeficit {
            required_f: m,
            required_x: m - 1,
            got_f: f_degree,
            got_x: x_degree,
        });
    }
    Ok(())
}

/// Constant terms of the iterates `L_X^k F`, `k = 1..=m`.
pub fn psi_tower(f: &TruncatedJet, x: &JetField, m: usize) -> Result<SaariVector> {
    check_tower_degrees(f.degree(), x.degree(), m)?;
    let x = x.truncate(m - 1);
    let mut g = f.truncate(m);
    let mut values = Vec::with_capacity(m);
    for _ in 0..m {
        g = lie_derivative(&g, &x)?;
        values.push(g.constant_term());
    }
    Ok(SaariVector {
        values,
        order: m,
        base_point: f.base_point().to_vec(),
    })
}

fn check_point(x: &dyn VectorField, z: &[f64]) -> Result<()> {
    if x.dim() != z.len() {
        return Err(Error::InvalidInput(format!(
            "field dimension {} vs point dimension {}",
            x.dim(),
            z.len()
        )));
    }
    Ok(())
}

fn no_series(what: &str) -> Error {
    Error::Unsupported(format!("{what} has no closed-form series evaluation"))
}

fn taylor_flow<C: Coeff>(
    z: &[f64],
    order: usize,
    along: impl Fn(&[Series<C>]) -> Option<Result<Vec<Series<C>>>>,
) -> Result<Vec<Series<C>>> {
    let mut path: Vec<Series<C>> = z
        .iter()
        .map(|&c| Series::constant(C::from(c), order))
        .collect();
    // Coefficient j of X(gamma) only involves gamma's coefficients up to j,
    // and gamma' = X(gamma) then fixes coefficient j + 1.
    for j in 0..order {
        let v = along(&path).ok_or_else(|| no_series("field"))??;
        for (p, vi) in path.iter_mut().zip(&v) {
            p.set_coeff(j + 1, vi.coeff(j) / C::from((j + 1) as f64));
        }
    }
    Ok(path)
}

/// Taylor coefficients of the solution `gamma(t)` of `X` with `gamma(0) = z`,
/// up to `t^order`.
pub fn flow_series(x: &dyn VectorField, z: &[f64], order: usize) -> Result<Vec<Series>> {
    check_point(x, z)?;
    taylor_flow(z, order, |p| x.along(p))
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidInput("tower order must be at least 1".into()));
    }
    Ok(())
}

/// The tower computed as `k! [t^k] F(gamma(t))`.
pub fn psi_along_flow(
    f: &dyn Observable,
    x: &dyn VectorField,
    z: &[f64],
    m: usize,
) -> Result<SaariVector> {
    check_order(m)?;
    let path = flow_series(x, z, m)?;
    let fs = f.along(&path).ok_or_else(|| no_series("observable"))??;
    Ok(SaariVector {
        values: (1..=m).map(|k| fs.derivative_at_zero(k)).collect(),
        order: m,
        base_point: z.to_vec(),
    })
}

/// As [`psi_along_flow`], carried out in double-double arithmetic and rounded
/// at the end. Entries that are near-total cancellations of large terms (the
/// tower of a conserved quantity, say) keep about 16 more digits.
pub fn psi_along_flow_extended(
    f: &dyn Observable,
    x: &dyn VectorField,
    z: &[f64],
    m: usize,
) -> Result<SaariVector> {
    check_order(m)?;
    check_point(x, z)?;
    let path = taylor_flow(z, m, |p| x.along_extended(p))?;
    let fs = f
        .along_extended(&path)
        .ok_or_else(|| no_series("observable"))??;
    Ok(SaariVector {
        values: (1..=m).map(|k| fs.derivative_at_zero(k).to_f64()).collect(),
        order: m,
        base_point: z.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    pub threshold: f64,
    pub full_rank_expected: usize,
    pub submersion: bool,
}

impl RankReport {
    /// Rank of a row-major `rows x cols` matrix.
    pub fn from_rows(rows: &[Vec<f64>], threshold: f64, full_rank_expected: usize) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut singular_values = if r == 0 || c == 0 {
            Vec::new()
        } else {
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            DMatrix::from_row_slice(r, c, &flat)
                .singular_values()
                .iter()
                .copied()
                .collect()
        };
        singular_values.sort_by(|a, b| b.total_cmp(a));
        let largest = singular_values.first().copied().unwrap_or(0.0);
        let numerical_rank = if largest > 0.0 {
            singular_values
                .iter()
                .filter(|&&s| s > threshold * largest)
                .count()
        } else {
            0
        };
        Self {
            singular_values,
            numerical_rank,
            threshold,
            full_rank_expected,
            submersion: numerical_rank == full_rank_expected,
        }
    }
}

/// A jet coordinate: the partial derivative `d^alpha` of the observable
/// (`component == None`) or of field component `component`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetCoordinate {
    pub component: Option<usize>,
    pub alpha: MultiIndex,
}

/// Jacobian of the tower with respect to jet coordinates (partial
/// derivatives, not Taylor coefficients).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiJacobian {
    pub columns: Vec<JetCoordinate>,
    /// Row `k - 1` holds the derivatives of `Psi_k`.
    pub rows: Vec<Vec<f64>>,
    pub report: RankReport,
    pub field_norm: f64,
    pub gradient_norm: f64,
}

impl PsiJacobian {
    pub fn column_index(&self, component: Option<usize>, alpha: &[u32]) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.component == component && c.alpha.exponents() == alpha)
    }

    pub fn entry(&self, k: usize, component: Option<usize>, alpha: &[u32]) -> Option<f64> {
        let col = self.column_index(component, alpha)?;
        self.rows.get(k - 1).map(|r| r[col])
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Exact Jacobian of `Psi` with respect to the observable's jet coordinates
/// `d^alpha F(z)`, `1 <= |alpha| <= jet_degree`. `Psi` is linear in `F`, so
/// column `alpha` is the tower of `(w - z)^alpha / alpha!`, which along the
/// flow `z + delta(t)` of the field jet is `k! [t^k] delta^alpha / alpha!`.
/// Each column then costs one series product instead of a jet tower.
pub fn dpsi_wrt_f(x: &JetField, m: usize, jet_degree: usize) -> Result<PsiJacobian> {
    dpsi_wrt_f_with_threshold(x, m, jet_degree, DEFAULT_RANK_THRESHOLD)
}

pub fn dpsi_wrt_f_with_threshold(
    x: &JetField,
    m: usize,
    jet_degree: usize,
    threshold: f64,
) -> Result<PsiJacobian> {
    check_tower_degrees(jet_degree, x.degree(), m)?;
    let z = x.base_point().to_vec();
    let path = taylor_flow(&z, m, |p| Some(Ok(jet_field_along(x, p))))?;
    let basis = MonomialBasis::shared(x.dim(), jet_degree);
    let powers = displacement_powers(&path, &z, &basis);
    let mut columns = Vec::with_capacity(basis.len() - 1);
    let mut rows = vec![Vec::with_capacity(basis.len() - 1); m];
    for (idx, power) in powers.iter().enumerate().skip(1) {
        let alpha = basis.monomial(idx);
        let inv = 1.0 / alpha.factorial();
        for (k, row) in rows.iter_mut().enumerate() {
            row.push(factorial(k + 1) * power.coeff(k + 1) * inv);
        }
        columns.push(JetCoordinate {
            component: None,
            alpha: alpha.clone(),
        });
    }
    let report = RankReport::from_rows(&rows, threshold, m);
    Ok(PsiJacobian {
        columns,
        rows,
        report,
        field_norm: euclid(&x.value()),
        gradient_norm: f64::NAN,
    })
}

/// `(gamma - z)^alpha` for every monomial of `basis`, built from its parent
/// monomial with one exponent lowered.
fn displacement_powers(gamma: &[Series], z: &[f64], basis: &MonomialBasis) -> Vec<Series> {
    let order = gamma.first().map_or(0, Series::order);
    let delta: Vec<Series> = gamma
        .iter()
        .zip(z)
        .map(|(g, &c)| g.clone() + (-c))
        .collect();
    let mut powers = Vec::with_capacity(basis.len());
    powers.push(Series::constant(1.0, order));
    let mut parent = vec![0u32; basis.dim()];
    for idx in 1..basis.len() {
        let alpha = basis.monomial(idx).exponents();
        let axis = alpha.iter().position(|&e| e > 0).expect("non-constant");
        parent.copy_from_slice(alpha);
        parent[axis] -= 1;
        let p = basis.index_of(&parent).expect("basis is closed downwards");
        let next = powers[p].clone() * delta[axis].clone();
        powers.push(next);
    }
    powers
}

/// The field jet evaluated along a series path about its base point.
fn jet_field_along(x: &JetField, gamma: &[Series]) -> Vec<Series> {
    let basis = MonomialBasis::shared(x.dim(), x.degree());
    let powers = displacement_powers(gamma, x.base_point(), &basis);
    x.components()
        .iter()
        .map(|c| jet_along(c, &powers))
        .collect()
}

/// `sum_alpha c_alpha (gamma - z)^alpha` given the displacement powers of a
/// basis of at least the jet's degree.
fn jet_along(jet: &TruncatedJet, powers: &[Series]) -> Series {
    let order = powers.first().map_or(0, Series::order);
    let mut out = vec![0.0; order + 1];
    for (&coef, power) in jet.coeffs().iter().zip(powers) {
        if coef != 0.0 {
            for (o, &pk) in out.iter_mut().zip(power.coeffs()) {
                *o += coef * pk;
            }
        }
    }
    Series::from_coeffs(out)
}

/// Finite-difference stencil for [`dpsi_wrt_x`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceScheme {
    /// Two-point central difference.
    Central,
    /// Symmetric stencil on `2r + 1` points with `2r >= m`. Each tower entry is
    /// a polynomial of degree at most `m` in any single field coordinate, so
    /// this stencil differentiates it exactly up to round-off.
    PolynomialExact,
    /// No differencing: reverse-mode differentiation of the flow series, one
    /// adjoint solve per tower entry. Exact, and cheap enough for field jets
    /// with millions of coordinates.
    Adjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldJacobianOptions {
    pub step_scale: f64,
    pub scheme: DifferenceScheme,
    pub threshold: f64,
    /// Relative deviation tolerated by the built-in structural spot-check.
    pub spot_check_tol: f64,
}

/// The default differentiates exactly by the adjoint method; `step_scale`
/// only applies to the difference schemes.
impl Default for FieldJacobianOptions {
    fn default() -> Self {
        Self {
            step_scale: 1.0,
            scheme: DifferenceScheme::Adjoint,
            threshold: DEFAULT_RANK_THRESHOLD,
            spot_check_tol: 1e-6,
        }
    }
}

impl FieldJacobianOptions {
    /// Two-point central differences with `h = 1e-5 max(1, |coordinate|)`.
    pub fn central() -> Self {
        Self {
            step_scale: 1e-5,
            scheme: DifferenceScheme::Central,
            ..Self::default()
        }
    }

    /// The `(2r + 1)`-point stencil on a unit-scale step.
    pub fn polynomial_exact() -> Self {
        Self {
            scheme: DifferenceScheme::PolynomialExact,
            ..Self::default()
        }
    }
}

pub fn dpsi_wrt_x(f: &TruncatedJet, x: &JetField, m: usize) -> Result<PsiJacobian> {
    dpsi_wrt_x_with(f, x, m, &FieldJacobianOptions::default())
}

/// Jacobian of `Psi` with respect to every field jet coordinate
/// `d^alpha X^i(z)`, `|alpha| <= m - 1`, followed by a structural spot-check
/// against `dPsi_k / dX^i_{j..j} = F_i (X^j)^(k-1)`.
pub fn dpsi_wrt_x_with(
    f: &TruncatedJet,
    x: &JetField,
    m: usize,
    opts: &FieldJacobianOptions,
) -> Result<PsiJacobian> {
    check_tower_degrees(f.degree(), x.degree(), m)?;
    let f = f.truncate(m);
    let x = x.truncate(m - 1);

    let (columns, rows) = match opts.scheme {
        DifferenceScheme::Adjoint => field_columns_adjoint(&f, &x, m)?,
        DifferenceScheme::Central => {
            field_columns_differenced(&f, &x, m, &[-1, 1], &[-0.5, 0.5], opts.step_scale)?
        }
        DifferenceScheme::PolynomialExact => {
            let r = m.div_ceil(2).max(1);
            let (nodes, weights): (Vec<i64>, Vec<f64>) = crate::stencil::central_stencil(1, r)
                .into_iter()
                .filter(|&(s, _)| s != 0)
                .unzip();
            field_columns_differenced(&f, &x, m, &nodes, &weights, opts.step_scale)?
        }
    };

    let grad = f.gradient();
    let xz = x.value();
    let jac = PsiJacobian {
        columns,
        report: RankReport::from_rows(&rows, opts.threshold, m),
        rows,
        field_norm: euclid(&xz),
        gradient_norm: euclid(&grad),
    };
    spot_check(&jac, &grad, &xz, m, opts.spot_check_tol)?;
    Ok(jac)
}

type Columns = (Vec<JetCoordinate>, Vec<Vec<f64>>);

fn field_columns_differenced(
    f: &TruncatedJet,
    x: &JetField,
    m: usize,
    nodes: &[i64],
    weights: &[f64],
    step_scale: f64,
) -> Result<Columns> {
    let n = x.dim();
    let basis = MonomialBasis::shared(n, m - 1);
    let mut columns = Vec::with_capacity(n * basis.len());
    let mut rows = vec![Vec::with_capacity(n * basis.len()); m];
    for comp in 0..n {
        for idx in 0..basis.len() {
            let alpha = basis.monomial(idx);
            let fact = alpha.factorial();
            let partial = x.component(comp).coeffs()[idx] * fact;
            let h = step_scale * partial.abs().max(1.0);
            let mut deriv = vec![0.0; m];
            for (&s, &w) in nodes.iter().zip(weights) {
                let mut xp = x.clone();
                xp.components_mut()[comp].coeffs_mut()[idx] += s as f64 * h / fact;
                let psi = psi_tower(f, &xp, m)?;
                for (d, v) in deriv.iter_mut().zip(psi.values) {
                    *d += w * v;
                }
            }
            for (row, d) in rows.iter_mut().zip(deriv) {
                row.push(d / h);
            }
            columns.push(JetCoordinate {
                component: Some(comp),
                alpha: alpha.clone(),
            });
        }
    }
    Ok((columns, rows))
}

/// Along the flow series `gamma = z + delta`, coefficient `j + 1` of `gamma_i`
/// is `[t^j] X_i(gamma) / (j + 1)` and `Psi_k = k! [t^k] F(gamma)`. The
/// adjoint `lambda[i][r] = dPsi_k / d gamma_i[r]` is solved backwards in `r`;
/// the coefficient `c` of `(w - z)^alpha` in `X_i` then contributes
/// `sum_j lambda[i][j + 1] [t^j] delta^alpha / (j + 1)`.
fn field_columns_adjoint(f: &TruncatedJet, x: &JetField, m: usize) -> Result<Columns> {
    let n = x.dim();
    let z = x.base_point().to_vec();
    let gamma = taylor_flow(&z, m, |p| Some(Ok(jet_field_along(x, p))))?;
    let basis = MonomialBasis::shared(n, m - 1);
    let powers = displacement_powers(&gamma, &z, &basis);

    // dX_i/dw_l and dF/dw_l along gamma.
    let mut dx = vec![vec![Series::constant(0.0, m); n]; n];
    if m >= 2 {
        for (i, row) in dx.iter_mut().enumerate() {
            for (l, d) in row.iter_mut().enumerate() {
                *d = jet_along(&x.component(i).partial(l)?, &powers);
            }
        }
    }
    let df = (0..n)
        .map(|l| Ok(jet_along(&f.partial(l)?, &powers)))
        .collect::<Result<Vec<_>>>()?;

    // weights[k - 1][i][j] = lambda_k[i][j + 1] / (j + 1).
    let mut weights = vec![vec![vec![0.0; m]; n]; m];
    for (k, wk) in (1..=m).zip(weights.iter_mut()) {
        let kf = factorial(k);
        let mut lambda = vec![vec![0.0; m + 1]; n];
        for r in (1..=m).rev() {
            for l in 0..n {
                let mut acc = if r <= k { kf * df[l].coeff(k - r) } else { 0.0 };
                for (i, li) in lambda.iter().enumerate() {
                    for j in r..m {
                        acc += li[j + 1] * dx[i][l].coeff(j - r) / (j + 1) as f64;
                    }
                }
                lambda[l][r] = acc;
            }
        }
        for (w, li) in wk.iter_mut().zip(&lambda) {
            for (j, wj) in w.iter_mut().enumerate() {
                *wj = li[j + 1] / (j + 1) as f64;
            }
        }
    }

    let mut columns = Vec::with_capacity(n * basis.len());
    let mut rows = vec![Vec::with_capacity(n * basis.len()); m];
    for comp in 0..n {
        for (idx, power) in powers.iter().enumerate() {
            let alpha = basis.monomial(idx);
            let inv = 1.0 / alpha.factorial();
            let p = &power.coeffs()[..m];
            for (row, wk) in rows.iter_mut().zip(&weights) {
                let v: f64 = wk[comp].iter().zip(p).map(|(w, c)| w * c).sum();
                row.push(v * inv);
            }
            columns.push(JetCoordinate {
                component: Some(comp),
                alpha: alpha.clone(),
            });
        }
    }
    Ok((columns, rows))
}

fn argmax_abs(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, &x)| {
            if x.abs() > bv {
                (i, x.abs())
            } else {
                (bi, bv)
            }
        })
        .0
}

fn spot_check(jac: &PsiJacobian, grad: &[f64], xz: &[f64], m: usize, tol: f64) -> Result<()> {
    let i = argmax_abs(grad);
    let j = argmax_abs(xz);
    let n = grad.len();
    for k in 1..=m {
        let alpha = MultiIndex::pure(n, j, (k - 1) as u32);
        let got = jac
            .entry(k, Some(i), alpha.exponents())
            .expect("coordinate of order k - 1 is present");
        let expected = grad[i] * xz[j].powi(k as i32 - 1);
        let scale = expected.abs().max(f64::MIN_POSITIVE);
        let dev = (got - expected).abs();
        let bad = if expected == 0.0 {
            dev > tol
        } else {
            dev / scale > tol
        };
        if bad {
            return Err(Error::InternalConsistency(format!(
                "dPsi_{k}/dX^{i}_{alpha:?} = {got:e}, expected F_{i} (X^{j})^{} = {expected:e}",
                k - 1,
                alpha = alpha.exponents()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstructionTolerances {
    pub tol_eq: f64,
    pub tol_crit: f64,
}

impl Default for ObstructionTolerances {
    fn default() -> Self {
        Self {
            tol_eq: DEFAULT_TOL_EQ,
            tol_crit: DEFAULT_TOL_CRIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionSample {
    pub z: Vec<f64>,
    pub psi: SaariVector,
    pub norm_inf: f64,
    pub field_norm: f64,
    pub gradient_norm: f64,
    pub is_near_equilibrium: bool,
    pub is_near_f_critical: bool,
    pub tolerances: ObstructionTolerances,
}

/// Evaluates the tower of `f` along `x` at `z`, with equilibrium and
/// critical-point flags.
///
/// Closed-form models are handled by double-double Taylor propagation along
/// the flow;
/// anything else goes through jets (sampled where necessary) and
/// [`psi_tower`].
pub fn obstruction_at(
    f: &dyn Observable,
    x: &dyn VectorField,
    z: &[f64],
    m: usize,
    tol: &ObstructionTolerances,
) -> Result<ObstructionSample> {
    let xz = x.eval(z)?;
    let grad = f.gradient(z)?;
    let psi = match psi_along_flow_extended(f, x, z, m) {
        Err(Error::Unsupported(_)) => {
            let fj = f.jet(z, m)?;
            let xj = x.jet(z, m - 1)?;
            psi_tower(&fj, &xj, m)?
        }
        other => other?,
    };
    let field_norm = euclid(&xz);
    let gradient_norm = euclid(&grad);
    Ok(ObstructionSample {
        z: z.to_vec(),
        norm_inf: psi.norm_inf(),
        psi,
        field_norm,
        gradient_norm,
        is_near_equilibrium: field_norm < tol.tol_eq,
        is_near_f_critical: gradient_norm < tol.tol_crit,
        tolerances: *tol,
    })
}
