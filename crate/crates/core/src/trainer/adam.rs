/// First/second-moment state for bias-corrected Adam over a flat parameter
/// vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(len: usize) -> AdamState {
        Self::with_betas(len, 0.9, 0.999, 1e-8)
    }

    pub fn with_betas(len: usize, beta1: f64, beta2: f64, eps: f64) -> AdamState {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            beta1,
            beta2,
            eps,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// One descent step: `params -= eta * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], eta: f64) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= eta * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Free-function form of [`AdamState::step`].
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grad: &[f64], eta: f64) {
    state.step(params, grad, eta);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut s = AdamState::new(3);
        let mut p = vec![1.0, -2.0, 0.5];
        for _ in 0..50 {
            s.step(&mut p, &[0.0; 3], 0.1);
        }
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_moves_by_eta() {
        for g in [0.7, 42.0, -5.0] {
            let mut s = AdamState::new(1);
            let mut p = [0.0];
            s.step(&mut p, &[g], 0.01);
            assert!((p[0].abs() - 0.01).abs() < 1e-8, "g = {g}: {}", p[0]);
            assert_eq!(p[0].signum(), -g.signum());
        }
    }

    #[test]
    fn matches_reference_sequence() {
        // Independent script: x0 = 1, g_t = 2 x + sin(t), eta = 0.1, default betas.
        let expected = [
            0.9000000003519304,
            0.8001524394835053,
            0.7036900894344109,
            0.6168541870047247,
            0.540155701287365,
            0.46567970572246575,
            0.38733672365240945,
            0.3052398847396064,
            0.22405416074545464,
            0.15251991947979696,
        ];
        let mut s = AdamState::new(1);
        let mut x = [1.0];
        for (t, e) in expected.iter().enumerate() {
            let g = 2.0 * x[0] + ((t + 1) as f64).sin();
            adam_step(&mut s, &mut x, &[g], 0.1);
            assert!((x[0] - e).abs() < 1e-10, "step {}: {} vs {e}", t + 1, x[0]);
        }
    }
}
