//! Scalar and per-node building blocks of a graph attention layer.

use ndarray::{Array1, Array2, ArrayView1};

use super::GatError;

/// Negative-input slope of the attention LeakyReLU.
pub const LEAKY_SLOPE: f64 = 0.2;

#[inline]
pub fn leaky_relu(x: f64) -> f64 {
    if x > 0.0 { x } else { LEAKY_SLOPE * x }
}

#[inline]
pub fn leaky_relu_grad(x: f64) -> f64 {
    if x > 0.0 { 1.0 } else { LEAKY_SLOPE }
}

#[inline]
pub fn elu(x: f64) -> f64 {
    if x > 0.0 { x } else { x.exp_m1() }
}

#[inline]
pub fn elu_grad(x: f64) -> f64 {
    if x > 0.0 { 1.0 } else { x.exp() }
}

/// Nonlinearity applied after neighborhood aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Elu,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Elu => elu(x),
        }
    }
}

/// Parameters of one attention head: the feature transform `w` (`F' x F`)
/// and the attention vector `a` (`2F'`), whose first half scores the
/// receiving node and second half the neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionHeadParams {
    pub w: Array2<f64>,
    pub a: Array1<f64>,
}

impl AttentionHeadParams {
    pub fn out_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn in_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn check(&self) -> Result<(), GatError> {
        if self.a.len() != 2 * self.out_dim() {
            return Err(GatError::ShapeMismatch(format!(
                "attention vector has {} entries, expected {}",
                self.a.len(),
                2 * self.out_dim()
            )));
        }
        Ok(())
    }
}

/// `LeakyReLU(a . [W h_i || W h_j])`.
pub fn raw_attention_score(
    h_i: ArrayView1<f64>,
    h_j: ArrayView1<f64>,
    head: &AttentionHeadParams,
) -> Result<f64, GatError> {
    head.check()?;
    if h_i.len() != head.in_dim() || h_j.len() != head.in_dim() {
        return Err(GatError::ShapeMismatch(format!(
            "node features have {}/{} entries, head expects {}",
            h_i.len(),
            h_j.len(),
            head.in_dim()
        )));
    }
    let f = head.out_dim();
    let wi = head.w.dot(&h_i);
    let wj = head.w.dot(&h_j);
    let pre = head.a.slice(ndarray::s![..f]).dot(&wi) + head.a.slice(ndarray::s![f..]).dot(&wj);
    Ok(leaky_relu(pre))
}

/// Max-shifted softmax over one neighborhood's scores.
pub fn normalize_scores(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `sigma(sum_j alpha_j * wh_j)` for one node.
pub fn aggregate_head(alpha: &[f64], wh: &[ArrayView1<f64>], activation: Activation) -> Array1<f64> {
    assert_eq!(alpha.len(), wh.len(), "one coefficient per neighbor");
    let dim = wh.first().map_or(0, |v| v.len());
    let mut acc = Array1::<f64>::zeros(dim);
    for (&a, v) in alpha.iter().zip(wh) {
        acc.scaled_add(a, v);
    }
    acc.mapv_inplace(|x| activation.apply(x));
    acc
}

/// Mean of per-head outputs computed as `x_0 + sum_{l>0}(x_l - x_0) / L`,
/// so a single head or identical heads come back bit-for-bit unchanged.
pub(crate) fn head_mean(values: &[f64]) -> f64 {
    let first = values[0];
    if values.len() == 1 {
        return first;
    }
    let spread: f64 = values[1..].iter().map(|v| v - first).sum();
    first + spread / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_case() {
        let head = AttentionHeadParams { w: array![[1.0]], a: array![1.0, 1.0] };
        let z = array![0.0];
        assert_eq!(raw_attention_score(z.view(), z.view(), &head).unwrap(), 0.0);
    }

    #[test]
    fn negative_slope() {
        // pre-activation -1 -> -0.2
        let head = AttentionHeadParams { w: array![[1.0]], a: array![1.0, 0.0] };
        let h = array![-1.0];
        assert_eq!(raw_attention_score(h.view(), h.view(), &head).unwrap(), -0.2);
    }

    #[test]
    fn shape_mismatch() {
        let head = AttentionHeadParams { w: array![[1.0, 0.0]], a: array![1.0, 1.0, 1.0] };
        let h = array![1.0, 1.0];
        assert!(matches!(
            raw_attention_score(h.view(), h.view(), &head),
            Err(GatError::ShapeMismatch(_))
        ));
        let head = AttentionHeadParams { w: array![[1.0, 0.0]], a: array![1.0, 1.0] };
        let short = array![1.0];
        assert!(raw_attention_score(short.view(), h.view(), &head).is_err());
    }

    #[test]
    fn score_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (f, fp) = (4, 3);
        let w = Array::from_shape_fn((fp, f), |_| rng.gen_range(-1.0..1.0));
        let a = Array::from_shape_fn(2 * fp, |_| rng.gen_range(-1.0..1.0));
        let h: Vec<Array1<f64>> =
            (0..3).map(|_| Array::from_shape_fn(f, |_| rng.gen_range(-1.0..1.0))).collect();
        let head = AttentionHeadParams { w: w.clone(), a: a.clone() };
        for i in 0..3 {
            for j in 0..3 {
                // concatenate explicitly, then a single dot product
                let mut cat = Vec::new();
                for r in 0..fp {
                    cat.push((0..f).map(|c| w[[r, c]] * h[i][c]).sum::<f64>());
                }
                for r in 0..fp {
                    cat.push((0..f).map(|c| w[[r, c]] * h[j][c]).sum::<f64>());
                }
                let pre: f64 = cat.iter().zip(a.iter()).map(|(x, y)| x * y).sum();
                let expected = if pre > 0.0 { pre } else { 0.2 * pre };
                let got = raw_attention_score(h[i].view(), h[j].view(), &head).unwrap();
                assert!((got - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(normalize_scores(&[0.7, 0.7]), vec![0.5, 0.5]);
        assert_eq!(normalize_scores(&[-3.0]), vec![1.0]);
        let p = normalize_scores(&[0.0, 3f64.ln()]);
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15);
        let big = normalize_scores(&[1000.0, 1000.0]);
        assert_eq!(big, vec![0.5, 0.5]);
    }

    #[test]
    fn aggregate_examples() {
        let v = array![1.5, -2.0];
        let out = aggregate_head(&[1.0], &[v.view()], Activation::Identity);
        assert_eq!(out, v);
        let views = vec![v.view(); 4];
        let out = aggregate_head(&[0.25; 4], &views, Activation::Elu);
        assert_eq!(out, v.mapv(elu));
    }

    #[test]
    fn head_mean_exact_for_identical_values() {
        let x = 1.0 + f64::EPSILON;
        for l in 1..10 {
            assert_eq!(head_mean(&vec![x; l]), x);
        }
        assert!((head_mean(&[1.0, 2.0, 6.0]) - 3.0).abs() < 1e-15);
    }
}
