//! Dense feed-forward Q-network: ReLU hidden layers, linear output.
//!
//! Parameters are addressed as one flat vector (per layer: weights row-major
//! `[out][in]`, then biases) so gradients and optimizer state line up with
//! [`Mlp::parameters`].

use rand::Rng;

use super::replay::Transition;
use super::DqnError;

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Dense {
    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.biases
                .iter()
                .zip(self.weights.chunks_exact(self.inputs))
                .map(|(b, row)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()),
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    layers: Vec<Dense>,
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

impl Mlp {
    /// He-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self, DqnError> {
        let mut net = Self::zeros(sizes)?;
        for layer in &mut net.layers {
            let bound = (6.0 / layer.inputs as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self, DqnError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(DqnError::BadShape(sizes.to_vec()));
        }
        let layers = sizes
            .windows(2)
            .map(|w| Dense {
                inputs: w[0],
                outputs: w[1],
                weights: vec![0.0; w[0] * w[1]],
                biases: vec![0.0; w[1]],
            })
            .collect();
        Ok(Self {
            sizes: sizes.to_vec(),
            layers,
        })
    }

    pub fn from_parameters(sizes: &[usize], params: &[f64]) -> Result<Self, DqnError> {
        let mut net = Self::zeros(sizes)?;
        net.set_parameters(params)?;
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<(), DqnError> {
        if params.len() != self.parameter_count() {
            return Err(DqnError::ParameterCount {
                expected: self.parameter_count(),
                found: params.len(),
            });
        }
        let mut rest = params;
        for l in &mut self.layers {
            let (w, tail) = rest.split_at(l.weights.len());
            let (b, tail) = tail.split_at(l.biases.len());
            l.weights.copy_from_slice(w);
            l.biases.copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    /// Mutable weights (row-major `[out][in]`) and biases of layer `i`.
    pub fn layer_mut(&mut self, i: usize) -> (&mut [f64], &mut [f64]) {
        let l = &mut self.layers[i];
        (&mut l.weights, &mut l.biases)
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.input_dim(), "input width");
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if i != last {
                next.iter_mut().for_each(|v| *v = relu(*v));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Mean squared error between `Q(input_b)[action_b]` and `target_b`, and
    /// its gradient with respect to every parameter.
    pub fn loss_and_gradient(
        &self,
        inputs: &[Vec<f64>],
        actions: &[usize],
        targets: &[f64],
    ) -> (f64, Vec<f64>) {
        assert!(!inputs.is_empty(), "empty batch");
        assert_eq!(inputs.len(), actions.len());
        assert_eq!(inputs.len(), targets.len());
        let batch = inputs.len() as f64;
        let mut grads: Vec<Dense> = self
            .layers
            .iter()
            .map(|l| Dense {
                inputs: l.inputs,
                outputs: l.outputs,
                weights: vec![0.0; l.weights.len()],
                biases: vec![0.0; l.biases.len()],
            })
            .collect();
        let last = self.layers.len() - 1;
        let mut loss = 0.0;
        // activations[l] is the input to layer l; its ReLU mask is activations[l] > 0
        let mut activations: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len() + 1];

        for ((x, &a), &y) in inputs.iter().zip(actions).zip(targets) {
            activations[0].clone_from(x);
            for (i, layer) in self.layers.iter().enumerate() {
                let (head, tail) = activations.split_at_mut(i + 1);
                layer.apply(&head[i], &mut tail[0]);
                if i != last {
                    tail[0].iter_mut().for_each(|v| *v = relu(*v));
                }
            }
            let q = activations[last + 1][a];
            let err = q - y;
            loss += err * err / batch;

            let mut delta = vec![0.0; self.output_dim()];
            delta[a] = 2.0 * err / batch;
            for i in (0..self.layers.len()).rev() {
                let layer = &self.layers[i];
                let g = &mut grads[i];
                let input = &activations[i];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    g.biases[o] += d;
                    let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (gw, &v) in row.iter_mut().zip(input) {
                        *gw += d * v;
                    }
                }
                if i > 0 {
                    let mut prev = vec![0.0; layer.inputs];
                    for (o, &d) in delta.iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                        for (p, &w) in prev.iter_mut().zip(row) {
                            *p += w * d;
                        }
                    }
                    for (p, &v) in prev.iter_mut().zip(input) {
                        if v <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }

        let mut flat = Vec::with_capacity(self.parameter_count());
        for g in grads {
            flat.extend(g.weights);
            flat.extend(g.biases);
        }
        (loss, flat)
    }

    /// `theta -= lr * grad`.
    pub fn apply_gradient(&mut self, grad: &[f64], lr: f64) {
        let mut rest = grad;
        for l in &mut self.layers {
            for p in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *p -= lr * rest[0];
                rest = &rest[1..];
            }
        }
    }

    /// Index of the largest output; ties go to the lowest index.
    pub fn argmax(&self, input: &[f64]) -> usize {
        argmax(&self.forward(input))
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Bellman targets `r + gamma * max_a' target(s')` for a batch.
pub fn td_targets(batch: &[&Transition], target: &Mlp, gamma: f64) -> Vec<f64> {
    batch
        .iter()
        .map(|t| {
            let next = target.forward(&t.next_state);
            let best = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            t.reward + gamma * best
        })
        .collect()
}

/// Batch inputs, actions and Bellman targets for one update.
pub fn td_batch(
    batch: &[&Transition],
    target: &Mlp,
    gamma: f64,
) -> (Vec<Vec<f64>>, Vec<usize>, Vec<f64>) {
    let inputs = batch.iter().map(|t| t.state.clone()).collect();
    let actions = batch.iter().map(|t| t.action).collect();
    (inputs, actions, td_targets(batch, target, gamma))
}

/// One plain gradient-descent step on the mean squared TD error. Returns the
/// loss before the step. A non-finite loss or gradient leaves `net`
/// untouched.
pub fn mlp_update(
    net: &mut Mlp,
    batch: &[&Transition],
    target: &Mlp,
    gamma: f64,
    lr: f64,
) -> Result<f64, DqnError> {
    if batch.is_empty() {
        return Err(DqnError::EmptyBatch);
    }
    let (inputs, actions, targets) = td_batch(batch, target, gamma);
    let (loss, grad) = net.loss_and_gradient(&inputs, &actions, &targets);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(DqnError::NonFiniteGradient);
    }
    net.apply_gradient(&grad, lr);
    if !net.all_finite() {
        return Err(DqnError::NonFiniteGradient);
    }
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[8, 64, 64, 19]).unwrap();
        let out = net.forward(&[0.3; 8]);
        assert_eq!(out, vec![0.0; 19]);
        assert_eq!(net.argmax(&[0.3; 8]), 0);
    }

    #[test]
    fn hand_computed_forward() {
        // 1 -> 2 -> 1: h = relu([2x - 1, -x + 0.5]), y = 3 h0 - h1 + 0.25
        let mut net = Mlp::zeros(&[1, 2, 1]).unwrap();
        {
            let (w, b) = net.layer_mut(0);
            w.copy_from_slice(&[2.0, -1.0]);
            b.copy_from_slice(&[-1.0, 0.5]);
        }
        {
            let (w, b) = net.layer_mut(1);
            w.copy_from_slice(&[3.0, -1.0]);
            b.copy_from_slice(&[0.25]);
        }
        // x = 2: h = [3, 0] -> 9.25
        assert_eq!(net.forward(&[2.0]), vec![9.25]);
        // x = 0: h = [0, 0.5] -> -0.25
        assert_eq!(net.forward(&[0.0]), vec![-0.25]);
    }

    #[test]
    fn argmax_picks_favoured_index() {
        let mut net = Mlp::zeros(&[3, 4, 19]).unwrap();
        net.layer_mut(1).1[7] = 1.0;
        assert_eq!(net.argmax(&[0.1, 0.2, 0.3]), 7);
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn parameters_round_trip() {
        let net = Mlp::new(&[4, 6, 3], &mut rng(1)).unwrap();
        let p = net.parameters();
        assert_eq!(p.len(), 4 * 6 + 6 + 6 * 3 + 3);
        assert_eq!(Mlp::from_parameters(&[4, 6, 3], &p).unwrap(), net);
        assert!(Mlp::from_parameters(&[4, 6, 3], &p[1..]).is_err());
        assert!(Mlp::zeros(&[4]).is_err());
        assert!(Mlp::zeros(&[4, 0, 2]).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut r = rng(7);
        let net = Mlp::new(&[4, 16, 8, 5], &mut r).unwrap();
        let inputs: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..4).map(|_| r.random_range(-1.0..1.0)).collect())
            .collect();
        let actions: Vec<usize> = (0..6).map(|i| i % 5).collect();
        let targets: Vec<f64> = (0..6).map(|_| r.random_range(-2.0..2.0)).collect();
        let (_, grad) = net.loss_and_gradient(&inputs, &actions, &targets);
        let params = net.parameters();
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for i in 0..params.len() {
            let mut p = params.clone();
            p[i] += h;
            let up = Mlp::from_parameters(net.layer_sizes(), &p)
                .unwrap()
                .loss_and_gradient(&inputs, &actions, &targets)
                .0;
            p[i] -= 2.0 * h;
            let down = Mlp::from_parameters(net.layer_sizes(), &p)
                .unwrap()
                .loss_and_gradient(&inputs, &actions, &targets)
                .0;
            let numeric = (up - down) / (2.0 * h);
            let denom = grad[i].abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((grad[i] - numeric).abs() / denom);
        }
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn zero_discount_converges_to_reward() {
        let mut net = Mlp::new(&[3, 8, 4], &mut rng(3)).unwrap();
        let target = net.clone();
        let t = Transition {
            state: vec![0.2, 0.5, 0.9],
            action: 2,
            reward: 1.5,
            next_state: vec![0.1, 0.1, 0.1],
        };
        let batch = vec![&t; 8];
        let first = mlp_update(&mut net, &batch, &target, 0.0, 0.05).unwrap();
        for _ in 0..500 {
            mlp_update(&mut net, &batch, &target, 0.0, 0.05).unwrap();
        }
        let last = mlp_update(&mut net, &batch, &target, 0.0, 0.05).unwrap();
        assert!(last < first * 1e-3, "{first} -> {last}");
        assert!((net.forward(&t.state)[2] - 1.5).abs() < 1e-2);
    }

    #[test]
    fn updates_are_deterministic() {
        let base = Mlp::new(&[3, 8, 4], &mut rng(11)).unwrap();
        let ts: Vec<Transition> = (0..5)
            .map(|i| Transition {
                state: vec![i as f64 * 0.1, 0.5, 1.0],
                action: i % 4,
                reward: i as f64,
                next_state: vec![0.3, i as f64 * 0.2, 0.0],
            })
            .collect();
        let batch: Vec<&Transition> = ts.iter().collect();
        let mut a = base.clone();
        let mut b = base.clone();
        mlp_update(&mut a, &batch, &base, 0.9, 1e-2).unwrap();
        mlp_update(&mut b, &batch, &base, 0.9, 1e-2).unwrap();
        let pa: Vec<u64> = a.parameters().iter().map(|v| v.to_bits()).collect();
        let pb: Vec<u64> = b.parameters().iter().map(|v| v.to_bits()).collect();
        assert_eq!(pa, pb);
    }

    #[test]
    fn non_finite_update_is_rejected() {
        let mut net = Mlp::new(&[2, 4, 2], &mut rng(5)).unwrap();
        let before = net.clone();
        let t = Transition {
            state: vec![0.5, 0.5],
            action: 0,
            reward: f64::INFINITY,
            next_state: vec![0.5, 0.5],
        };
        assert!(matches!(
            mlp_update(&mut net, &[&t], &before, 0.9, 1e-3),
            Err(DqnError::NonFiniteGradient)
        ));
        assert_eq!(net, before);
        assert!(matches!(
            mlp_update(&mut net, &[], &before, 0.9, 1e-3),
            Err(DqnError::EmptyBatch)
        ));
    }
}
