//! Numerical jet extraction from point samples.

use std::collections::HashMap;

use super::{JetField, MonomialBasis, TruncatedJet};
use crate::error::{Error, Result};
use crate::stencil::central_stencil;

/// Highest degree accepted by the sampled extraction.
pub const MAX_SAMPLED_DEGREE: usize = 8;

/// A jet estimated from samples, with an error estimate per coefficient
/// (dense, graded-lex order, same units as the Taylor coefficients).
#[derive(Debug, Clone)]
pub struct SampledJet {
    pub jet: TruncatedJet,
    pub error_estimate: Vec<f64>,
}

/// Taylor coefficients of `f` about `z` up to `degree`, by central differences
/// with one level of Richardson extrapolation.
pub fn jet_from_samples<F>(f: F, z: &[f64], degree: usize) -> Result<SampledJet>
where
    F: Fn(&[f64]) -> f64,
{
    let (mut jets, mut errors) = extract(|x: &[f64]| Ok(vec![f(x)]), 1, z, degree)?;
    Ok(SampledJet {
        jet: jets.pop().expect("one component"),
        error_estimate: errors.pop().expect("one component"),
    })
}

/// Componentwise [`jet_from_samples`] for a vector field `R^n -> R^n`.
pub fn field_jet_from_samples<F>(
    f: F,
    z: &[f64],
    degree: usize,
) -> Result<(JetField, Vec<Vec<f64>>)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let (jets, errors) = extract(f, z.len(), z, degree)?;
    Ok((JetField::new(jets)?, errors))
}

pub(crate) fn extract<F>(
    f: F,
    outputs: usize,
    z: &[f64],
    degree: usize,
) -> Result<(Vec<TruncatedJet>, Vec<Vec<f64>>)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if degree > MAX_SAMPLED_DEGREE {
        return Err(Error::InvalidInput(format!(
            "sampled jets are limited to degree {MAX_SAMPLED_DEGREE}, requested {degree}"
        )));
    }
    let n = z.len();
    let basis = MonomialBasis::shared(n, degree);
    let mut jets: Vec<TruncatedJet> = (0..outputs)
        .map(|_| TruncatedJet::zero(degree, z))
        .collect::<Result<_>>()?;
    let mut errors = vec![vec![0.0; basis.len()]; outputs];

    let eval = |x: &[f64]| -> Result<Vec<f64>> {
        let v = f(x)?;
        if v.len() != outputs || v.iter().any(|c| !c.is_finite()) {
            return Err(Error::EvaluationDomain { point: x.to_vec() });
        }
        Ok(v)
    };

    let f0 = eval(z)?;
    for (jet, v) in jets.iter_mut().zip(&f0) {
        jet.coeffs_mut()[0] = *v;
    }

    // Samples are shared between multi-indices of equal order, which use the
    // same steps.
    let mut cache: HashMap<(usize, Vec<i64>), Vec<f64>> = HashMap::new();
    // One node wider than minimal: O(h^4) truncation per axis.
    let stencils: Vec<Vec<(i64, f64)>> = (0..=degree)
        .map(|p| central_stencil(p, p.div_ceil(2) + 1))
        .collect();

    for k in 1..=degree {
        // After one Richardson level the truncation error is O(h^6), so the
        // round-off/truncation balance for a k-th derivative is eps^(1/(k+6)).
        let h_base = f64::EPSILON.powf(1.0 / (k as f64 + 6.0));
        for idx in basis.order_range(k) {
            let alpha = basis.monomial(idx).exponents().to_vec();
            let mut estimates = Vec::with_capacity(2);
            for level in 0..2usize {
                let scale = h_base / (1u64 << level) as f64;
                let steps: Vec<f64> = z.iter().map(|&zi| scale * zi.abs().max(1.0)).collect();
                let mut acc = vec![0.0; outputs];
                let mut offsets = vec![0i64; n];
                let mut weight_stack = Vec::with_capacity(n);
                tensor_sum(
                    &alpha,
                    &stencils,
                    0,
                    &mut offsets,
                    &mut weight_stack,
                    &mut |offsets: &[i64], w: f64| -> Result<()> {
                        let key = (k * 2 + level, offsets.to_vec());
                        if !cache.contains_key(&key) {
                            let x: Vec<f64> = z
                                .iter()
                                .zip(offsets)
                                .zip(&steps)
                                .map(|((zi, &s), h)| zi + s as f64 * h)
                                .collect();
                            cache.insert(key.clone(), eval(&x)?);
                        }
                        for (a, v) in acc.iter_mut().zip(&cache[&key]) {
                            *a += w * v;
                        }
                        Ok(())
                    },
                )?;
                let denom: f64 = alpha
                    .iter()
                    .zip(&steps)
                    .map(|(&e, h)| h.powi(e as i32))
                    .product();
                estimates.push(acc.into_iter().map(|a| a / denom).collect::<Vec<_>>());
            }
            let fact = basis.monomial(idx).factorial();
            for o in 0..outputs {
                let coarse = estimates[0][o];
                let fine = estimates[1][o];
                let extrapolated = (16.0 * fine - coarse) / 15.0;
                jets[o].coeffs_mut()[idx] = extrapolated / fact;
                errors[o][idx] = (fine - coarse).abs() / 15.0 / fact;
            }
        }
    }
    Ok((jets, errors))
}

fn tensor_sum(
    alpha: &[u32],
    stencils: &[Vec<(i64, f64)>],
    axis: usize,
    offsets: &mut Vec<i64>,
    weights: &mut Vec<f64>,
    visit: &mut dyn FnMut(&[i64], f64) -> Result<()>,
) -> Result<()> {
    if axis == alpha.len() {
        return visit(offsets, weights.iter().product());
    }
    for &(s, w) in &stencils[alpha[axis] as usize] {
        offsets[axis] = s;
        weights.push(w);
        tensor_sum(alpha, stencils, axis + 1, offsets, weights, visit)?;
        weights.pop();
    }
    offsets[axis] = 0;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_about_origin() {
        let s = jet_from_samples(|x| x[0] * x[0], &[0.0], 2).unwrap();
        let c = s.jet.coeffs();
        assert!(c[0].abs() < 1e-8);
        assert!(c[1].abs() < 1e-8);
        assert!((c[2] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn oscillator_energy_about_unit_point() {
        let s = jet_from_samples(|x| 0.5 * (x[0] * x[0] + x[1] * x[1]), &[1.0, 0.0], 2).unwrap();
        let j = &s.jet;
        let expect = [
            (vec![0, 0], 0.5),
            (vec![1, 0], 1.0),
            (vec![0, 1], 0.0),
            (vec![2, 0], 0.5),
            (vec![1, 1], 0.0),
            (vec![0, 2], 0.5),
        ];
        for (alpha, c) in expect {
            assert!((j.coeff(&alpha).unwrap() - c).abs() < 1e-8, "{alpha:?}");
        }
    }

    #[test]
    fn sine_matches_analytic_taylor_coefficients() {
        let s = jet_from_samples(|x| x[0].sin(), &[0.0], 3).unwrap();
        let expected = [0.0, 1.0, 0.0, -1.0 / 6.0];
        for (k, e) in expected.iter().enumerate() {
            assert!((s.jet.coeffs()[k] - e).abs() < 1e-6, "k={k}");
            assert!(s.error_estimate[k] < 1e-4);
        }
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let r = jet_from_samples(|x| 1.0 / x[0], &[0.0], 1);
        assert!(matches!(r, Err(Error::EvaluationDomain { .. })));
    }

    #[test]
    fn degree_cap_is_enforced() {
        assert!(jet_from_samples(|x| x[0], &[0.0], MAX_SAMPLED_DEGREE + 1).is_err());
    }
}
