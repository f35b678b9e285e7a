use super::GatParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn new(learning_rate: f64) -> Self {
        Self { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First and second moment estimates, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(params: &GatParams) -> Self {
        let mut m = Vec::new();
        params.for_each(|_, t| m.push(vec![0.0; t.len()]));
        let v = m.clone();
        Self { m, v, step: 0 }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn moments(&self) -> (&[Vec<f64>], &[Vec<f64>]) {
        (&self.m, &self.v)
    }
}

/// Bias-corrected Adam update of one tensor at (1-based) step `t`.
pub fn adam_update(
    param: &mut [f64],
    grad: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    cfg: &AdamConfig,
) {
    let c1 = 1.0 - cfg.beta1.powi(t as i32);
    let c2 = 1.0 - cfg.beta2.powi(t as i32);
    for (((p, &g), m), v) in param.iter_mut().zip(grad).zip(m.iter_mut()).zip(v.iter_mut()) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

/// One Adam step over every model tensor.
pub fn adam_step(params: &mut GatParams, grads: &GatParams, state: &mut AdamState, cfg: &AdamConfig) {
    state.step += 1;
    let t = state.step;
    let mut grad_tensors = Vec::new();
    grads.for_each(|_, g| grad_tensors.push(g.to_vec()));
    let mut idx = 0;
    params.for_each_mut(|_, p| {
        adam_update(p, &grad_tensors[idx], &mut state.m[idx], &mut state.v[idx], t, cfg);
        idx += 1;
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_and_decays_state() {
        let cfg = AdamConfig::new(0.1);
        let (mut p, mut m, mut v) = ([1.0, -2.0], [0.5, 0.5], [0.25, 0.25]);
        adam_update(&mut p, &[0.0, 0.0], &mut m, &mut v, 3, &cfg);
        // stale moments still move the parameters
        assert_ne!(p, [1.0, -2.0]);
        assert_eq!(m, [0.45, 0.45]);
        assert!((v[0] - 0.25 * 0.999).abs() < 1e-15);
        let (mut p0, mut m0, mut v0) = ([1.0], [0.0], [0.0]);
        adam_update(&mut p0, &[0.0], &mut m0, &mut v0, 1, &cfg);
        assert_eq!(p0, [1.0]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = AdamConfig::new(3e-4);
        for g in [5.0, -0.01, 123.0] {
            let (mut p, mut m, mut v) = ([0.0], [0.0], [0.0]);
            adam_update(&mut p, &[g], &mut m, &mut v, 1, &cfg);
            assert!((p[0] + 3e-4 * f64::signum(g)).abs() < 1e-9);
        }
    }

    /// Reference trace written out with the textbook recurrences.
    fn reference_trace(x0: f64, lr: f64, steps: usize) -> Vec<f64> {
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        let (mut x, mut m, mut v) = (x0, 0.0, 0.0);
        let mut out = Vec::new();
        for t in 1..=steps {
            let g = 2.0 * (x - 3.0);
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powf(t as f64));
            let vh = v / (1.0 - b2.powf(t as f64));
            x -= lr * mh / (vh.sqrt() + eps);
            out.push(x);
        }
        out
    }

    #[test]
    fn quadratic_trace_matches_reference() {
        let cfg = AdamConfig::new(0.1);
        let reference = reference_trace(0.0, 0.1, 10);
        let (mut x, mut m, mut v) = ([0.0], [0.0], [0.0]);
        for (t, expected) in (1..=10).zip(reference) {
            let g = [2.0 * (x[0] - 3.0)];
            adam_update(&mut x, &g, &mut m, &mut v, t, &cfg);
            assert!((x[0] - expected).abs() < 1e-12, "step {t}: {} vs {expected}", x[0]);
        }
        assert!(x[0] > 0.9 && x[0] < 3.0);
    }
}
