//! The three benchmark networks and their explicit forward/backward wiring.
//!
//! All variants share the same LeNet-5 trunk:
//!
//! ```text
//! conv(1→6, 5×5, pad 2) → ReLU → maxpool 2×2
//! conv(6→16, 5×5, pad 0) → ReLU → maxpool 2×2
//! flatten(400) → dense(400→120) → ReLU → dense(120→84) → ReLU → dense(84→10)
//! ```
//!
//! The BorderNet and RandomNet variants prepend four single-channel 7×7
//! convolutions applied sequentially (pad 3, no bias, no activation between
//! them), so a 28×28 input keeps its spatial shape before entering the
//! trunk. Trunk weights are drawn from per-layer seeded streams that do not
//! depend on the variant: for a given seed, all three variants start from
//! bit-identical trunk parameters, isolating the effect of the front
//! filters.

use crate::adam::Parameter;
use crate::error::{CoreError, Result};
use crate::filter_bank::{BankKind, FilterBank};
use crate::ops::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool2x2_backward,
    maxpool2x2_forward, relu_backward, relu_forward,
};
use crate::rng::{next_symmetric_f32, stream_rng, streams};
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};

pub const INPUT_SIDE: usize = 28;
pub const NUM_CLASSES: usize = 10;
pub const FRONT_PAD: usize = 3;

/// Flattened feature count entering the first dense layer: 16 · 5 · 5.
pub const FLAT_FEATURES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Vanilla,
    BorderNet,
    RandomNet,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Vanilla => "vanilla",
            Variant::BorderNet => "bordernet",
            Variant::RandomNet => "randomnet",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        match s {
            "vanilla" => Ok(Variant::Vanilla),
            "bordernet" => Ok(Variant::BorderNet),
            "randomnet" => Ok(Variant::RandomNet),
            other => Err(CoreError::InvalidArgument(format!(
                "unknown variant '{other}' (expected vanilla, bordernet, or randomnet)"
            ))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Declarative description of a network; enough to rebuild it from scratch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub variant: Variant,
    /// Present exactly for BorderNet/RandomNet; kind must match the variant.
    pub front_bank: Option<FilterBank>,
    pub front_trainable: bool,
    /// Seed for trunk weight initialization (and downstream shuffling).
    pub seed: u64,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        match (self.variant, &self.front_bank) {
            (Variant::Vanilla, None) => Ok(()),
            (Variant::Vanilla, Some(_)) => Err(CoreError::InvalidArgument(
                "vanilla network does not take a filter bank".into(),
            )),
            (Variant::BorderNet, Some(b)) if b.kind == BankKind::Oriented => Ok(()),
            (Variant::RandomNet, Some(b)) if b.kind == BankKind::Random => Ok(()),
            (v, Some(b)) => Err(CoreError::InvalidArgument(format!(
                "variant {v} cannot use a {:?} filter bank",
                b.kind
            ))),
            (v, None) => Err(CoreError::InvalidArgument(format!(
                "variant {v} requires a filter bank"
            ))),
        }
    }

    fn front_count(&self) -> usize {
        self.front_bank.as_ref().map_or(0, |b| b.kernels.len())
    }
}

/// A built network: spec plus its ordered parameter list.
///
/// Parameter order is fixed — front kernels (if any) first, then the trunk
/// layers — and the checkpoint format serializes them in this order.
#[derive(Debug, Clone)]
pub struct Network {
    pub spec: NetworkSpec,
    pub params: Vec<Parameter>,
}

/// Saved intermediate values from a forward pass, consumed by `backward`.
#[derive(Debug)]
pub struct ForwardCache {
    /// Input to each front convolution (BorderNet/RandomNet only).
    front_inputs: Vec<Tensor>,
    conv1_input: Tensor,
    conv1_pre: Tensor,
    pool1_argmax: Vec<u32>,
    conv2_input: Tensor,
    conv2_pre: Tensor,
    pool2_argmax: Vec<u32>,
    fc1_input: Tensor,
    fc1_pre: Tensor,
    fc2_input: Tensor,
    fc2_pre: Tensor,
    fc3_input: Tensor,
}

impl ForwardCache {
    /// Shapes of the trunk intermediates, for shape-contract checks.
    pub fn trunk_shapes(&self) -> Vec<Vec<usize>> {
        vec![
            self.conv1_pre.shape().to_vec(),
            self.conv2_input.shape().to_vec(),
            self.conv2_pre.shape().to_vec(),
            self.fc1_input.shape().to_vec(),
            self.fc2_input.shape().to_vec(),
            self.fc3_input.shape().to_vec(),
        ]
    }
}

const TRUNK_LAYERS: [(&str, usize); 5] = [
    ("conv1", 0),
    ("conv2", 1),
    ("fc1", 2),
    ("fc2", 3),
    ("fc3", 4),
];

fn init_uniform(shape: &[usize], fan_in: usize, seed: u64, layer_idx: u64) -> Tensor {
    let bound = (1.0 / fan_in as f32).sqrt();
    let mut rng = stream_rng(seed, streams::WEIGHT_INIT + layer_idx);
    let mut t = Tensor::zeros(shape);
    for v in t.data_mut() {
        *v = next_symmetric_f32(&mut rng, bound);
    }
    t
}

fn trunk_parameters(seed: u64) -> Vec<Parameter> {
    let mut params = Vec::new();
    let defs: [(&str, Vec<usize>, usize); 5] = [
        ("conv1", vec![6, 1, 5, 5], 25),
        ("conv2", vec![16, 6, 5, 5], 150),
        ("fc1", vec![120, FLAT_FEATURES], FLAT_FEATURES),
        ("fc2", vec![84, 120], 120),
        ("fc3", vec![NUM_CLASSES, 84], 84),
    ];
    for ((name, shape, fan_in), (_, layer_idx)) in defs.into_iter().zip(TRUNK_LAYERS) {
        let weights = init_uniform(&shape, fan_in, seed, layer_idx as u64);
        params.push(Parameter::new(format!("{name}.weight"), weights, true));
        let out_features = shape[0];
        params.push(Parameter::new(
            format!("{name}.bias"),
            Tensor::zeros(&[out_features]),
            true,
        ));
    }
    params
}

impl Network {
    /// Build a fresh network from its spec (initial weights, biases zero).
    pub fn from_spec(spec: NetworkSpec) -> Result<Network> {
        spec.validate()?;
        let mut params = Vec::new();
        if let Some(bank) = &spec.front_bank {
            for (i, kernel) in bank.kernels.iter().enumerate() {
                params.push(Parameter::new(
                    format!("front.{i}"),
                    kernel.clone(),
                    spec.front_trainable,
                ));
            }
        }
        params.extend(trunk_parameters(spec.seed));
        Ok(Network { spec, params })
    }

    pub fn variant(&self) -> Variant {
        self.spec.variant
    }

    fn front_count(&self) -> usize {
        self.spec.front_count()
    }

    /// Index of a trunk parameter: front count + 2·layer + (0 weight, 1 bias).
    fn trunk_idx(&self, layer: usize, bias: bool) -> usize {
        self.front_count() + 2 * layer + usize::from(bias)
    }

    pub fn param(&self, name: &str) -> Option<&Parameter> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Values of the front kernels, for frozen-invariance checks.
    pub fn front_kernels(&self) -> Vec<&Tensor> {
        self.params[..self.front_count()]
            .iter()
            .map(|p| &p.value)
            .collect()
    }

    /// Number of parameters the optimizer may update.
    pub fn trainable_parameter_count(&self) -> usize {
        self.params
            .iter()
            .filter(|p| p.trainable)
            .map(|p| p.value.len())
            .sum()
    }

    /// Number of parameters stored in a checkpoint (trainable or frozen).
    pub fn stored_parameter_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.zero_grad();
        }
    }

    /// Logits for a batch; no cache retained. Input is [N, 1, 28, 28].
    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        self.forward_inner(input, false).map(|(logits, _)| logits)
    }

    /// Logits plus the cache needed for a subsequent `backward`.
    pub fn forward_training(&self, input: &Tensor) -> Result<(Tensor, ForwardCache)> {
        let (logits, cache) = self.forward_inner(input, true)?;
        Ok((logits, cache.expect("cache requested")))
    }

    fn forward_inner(
        &self,
        input: &Tensor,
        keep_cache: bool,
    ) -> Result<(Tensor, Option<ForwardCache>)> {
        if input.rank() != 4 || input.dim(1) != 1 {
            return Err(CoreError::ShapeMismatch(format!(
                "network input must be [N,1,H,W], got {:?}",
                input.shape()
            )));
        }
        let mut front_inputs = Vec::new();
        let mut x = input.clone();
        for i in 0..self.front_count() {
            let kernel = &self.params[i].value;
            let y = conv2d_forward(&x, kernel, None, FRONT_PAD)?;
            if keep_cache {
                front_inputs.push(x);
            }
            x = y;
        }

        let conv1_input = x;
        let w = |l: usize| &self.params[self.trunk_idx(l, false)].value;
        let b = |l: usize| &self.params[self.trunk_idx(l, true)].value;

        let conv1_pre = conv2d_forward(&conv1_input, w(0), Some(b(0)), 2)?;
        let conv1_act = relu_forward(&conv1_pre)?;
        let (pool1, pool1_argmax) = maxpool2x2_forward(&conv1_act)?;

        let conv2_pre = conv2d_forward(&pool1, w(1), Some(b(1)), 0)?;
        let conv2_act = relu_forward(&conv2_pre)?;
        let (pool2, pool2_argmax) = maxpool2x2_forward(&conv2_act)?;

        let n = pool2.dim(0);
        let flat = pool2.reshape(&[n, pool2.len() / n])?;
        if flat.dim(1) != FLAT_FEATURES {
            return Err(CoreError::ShapeMismatch(format!(
                "flattened features {} != {FLAT_FEATURES}; input spatial size must be 28×28",
                flat.dim(1)
            )));
        }

        let fc1_pre = dense_forward(&flat, w(2), b(2))?;
        let fc1_act = relu_forward(&fc1_pre)?;
        let fc2_pre = dense_forward(&fc1_act, w(3), b(3))?;
        let fc2_act = relu_forward(&fc2_pre)?;
        let logits = dense_forward(&fc2_act, w(4), b(4))?;

        let cache = keep_cache.then(|| ForwardCache {
            front_inputs,
            conv1_input,
            conv1_pre,
            pool1_argmax,
            conv2_input: pool1,
            conv2_pre,
            pool2_argmax,
            fc1_input: flat,
            fc1_pre,
            fc2_input: fc1_act,
            fc2_pre,
            fc3_input: fc2_act,
        });
        Ok((logits, cache))
    }

    /// Accumulate parameter gradients from `grad_logits`; returns nothing —
    /// gradients land in `self.params[..].gradient` (added, not assigned).
    pub fn backward(&mut self, grad_logits: &Tensor, cache: &ForwardCache) -> Result<()> {
        let fc = self.front_count();

        // Dense stack, last layer first.
        let (g_fc2_act, gw5, gb5) = dense_backward(
            grad_logits,
            &cache.fc3_input,
            &self.params[self.trunk_idx(4, false)].value,
        )?;
        let g_fc2_pre = relu_backward(&g_fc2_act, &cache.fc2_pre)?;
        let (g_fc1_act, gw4, gb4) = dense_backward(
            &g_fc2_pre,
            &cache.fc2_input,
            &self.params[self.trunk_idx(3, false)].value,
        )?;
        let g_fc1_pre = relu_backward(&g_fc1_act, &cache.fc1_pre)?;
        let (g_flat, gw3, gb3) = dense_backward(
            &g_fc1_pre,
            &cache.fc1_input,
            &self.params[self.trunk_idx(2, false)].value,
        )?;

        // Un-flatten to the pool2 output shape [N, 16, 5, 5].
        let n = g_flat.dim(0);
        let g_pool2 = g_flat.reshape(&[n, 16, 5, 5])?;
        let g_conv2_act = maxpool2x2_backward(&g_pool2, &cache.pool2_argmax)?;
        let g_conv2_pre = relu_backward(&g_conv2_act, &cache.conv2_pre)?;
        let (g_pool1, gk2, gb2) = conv2d_backward(
            &g_conv2_pre,
            &cache.conv2_input,
            &self.params[self.trunk_idx(1, false)].value,
            0,
        )?;
        let g_conv1_act = maxpool2x2_backward(&g_pool1, &cache.pool1_argmax)?;
        let g_conv1_pre = relu_backward(&g_conv1_act, &cache.conv1_pre)?;
        let (mut g_x, gk1, gb1) = conv2d_backward(
            &g_conv1_pre,
            &cache.conv1_input,
            &self.params[self.trunk_idx(0, false)].value,
            2,
        )?;

        // Front convolutions, in reverse order.
        let mut front_kernel_grads = Vec::with_capacity(fc);
        for i in (0..fc).rev() {
            let (g_in, g_kernel, _) =
                conv2d_backward(&g_x, &cache.front_inputs[i], &self.params[i].value, FRONT_PAD)?;
            front_kernel_grads.push((i, g_kernel));
            g_x = g_in;
        }

        for (i, g) in front_kernel_grads {
            accumulate(&mut self.params[i].gradient, &g)?;
        }
        let trunk_grads = [
            (0, gk1, gb1),
            (1, gk2, gb2),
            (2, gw3, gb3),
            (3, gw4, gb4),
            (4, gw5, gb5),
        ];
        for (layer, gw, gb) in trunk_grads {
            let wi = self.trunk_idx(layer, false);
            let bi = self.trunk_idx(layer, true);
            accumulate(&mut self.params[wi].gradient, &gw)?;
            accumulate(&mut self.params[bi].gradient, &gb)?;
        }
        Ok(())
    }
}

fn accumulate(into: &mut Tensor, from: &Tensor) -> Result<()> {
    if into.shape() != from.shape() {
        return Err(CoreError::ShapeMismatch(format!(
            "gradient accumulation {:?} vs {:?}",
            into.shape(),
            from.shape()
        )));
    }
    for (a, b) in into.data_mut().iter_mut().zip(from.iter()) {
        *a += b;
    }
    Ok(())
}

/// Plain LeNet-5.
pub fn build_vanilla(seed: u64) -> Network {
    Network::from_spec(NetworkSpec {
        variant: Variant::Vanilla,
        front_bank: None,
        front_trainable: false,
        seed,
    })
    .expect("vanilla spec is always valid")
}

/// LeNet-5 behind the four oriented stripe filters.
pub fn build_bordernet(seed: u64, bank: FilterBank, trainable: bool) -> Result<Network> {
    if bank.kind != BankKind::Oriented {
        return Err(CoreError::InvalidArgument(
            "bordernet requires the oriented filter bank".into(),
        ));
    }
    Network::from_spec(NetworkSpec {
        variant: Variant::BorderNet,
        front_bank: Some(bank),
        front_trainable: trainable,
        seed,
    })
}

/// Parameter-matched control: same wiring, random front kernels.
pub fn build_randomnet(seed: u64, bank: FilterBank, trainable: bool) -> Result<Network> {
    if bank.kind != BankKind::Random {
        return Err(CoreError::InvalidArgument(
            "randomnet requires a random filter bank".into(),
        ));
    }
    Network::from_spec(NetworkSpec {
        variant: Variant::RandomNet,
        front_bank: Some(bank),
        front_trainable: trainable,
        seed,
    })
}
