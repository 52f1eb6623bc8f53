use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::{BUTTON_INDEX, CELLS, CHANNELS, OBS_DIM, VIEW};
use crate::numerics::{Activation, Checkpoint, ForwardCache, Gradients, Mlp, Parameters};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// One shared network per cell plus a scalar network for the button status.
    Feature,
    /// One network over the whole flattened observation.
    Image,
}

/// Starting point of the transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Fan-in scaled random weights.
    Random,
    /// Random weights plus an embedded identity path, so that initially
    /// `s_e ~= s_i`. Needs every hidden layer at least as wide as the input.
    Identity,
    /// `Identity` where the widths allow it, `Random` otherwise.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImaginationConfig {
    pub hidden: Vec<usize>,
    /// Feature variant only: append the cell's (row, col) to its input.
    pub cell_coordinates: bool,
    pub init: Init,
    /// Pre-activation magnitude of the identity path: outputs start at
    /// `sigmoid(+-gain)`.
    pub identity_gain: f64,
}

impl Default for ImaginationConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            cell_coordinates: false,
            init: Init::Auto,
            identity_gain: 4.0,
        }
    }
}

impl ImaginationConfig {
    pub fn validate(&self, variant: Variant) -> Result<()> {
        if self.hidden.contains(&0) {
            return Err(Error::Config("imagination hidden widths must be positive".into()));
        }
        if self.init == Init::Identity && !self.identity_fits(variant) {
            return Err(Error::Config(format!(
                "identity initialisation needs hidden layers of at least {} units",
                passthrough_width(variant)
            )));
        }
        if !(self.identity_gain > 0.0) {
            return Err(Error::Config("identity_gain must be positive".into()));
        }
        Ok(())
    }

    fn identity_fits(&self, variant: Variant) -> bool {
        self.hidden.iter().all(|&h| h >= passthrough_width(variant))
    }
}

fn passthrough_width(variant: Variant) -> usize {
    match variant {
        Variant::Feature => CHANNELS,
        Variant::Image => OBS_DIM,
    }
}

/// Rewrites `net` so its first `n` inputs pass unchanged through every relu
/// layer into the output pre-activations as `gain * (2x - 1)`. Inputs are
/// assumed to lie in `[0, 1]`.
fn embed_identity<S: Scalar>(net: &mut Mlp<S>, n: usize, gain: f64) {
    let depth = net.layers().len();
    for (l, layer) in net.layers_mut().iter_mut().enumerate() {
        let no = layer.outputs;
        let last = l + 1 == depth;
        for i in 0..n {
            for j in 0..layer.inputs {
                // Column `i` reads only input `i`; rows `i` feed only column `i`.
                layer.weights[j * no + i] = S::zero();
            }
            for o in 0..no {
                layer.weights[i * no + o] = S::zero();
            }
            layer.weights[i * no + i] = S::of(if last { 2.0 * gain } else { 1.0 });
            layer.bias[i] = S::of(if last { -gain } else { 0.0 });
        }
    }
}

/// The transform `s_e = M(s_i)` from an independent agent's observation to
/// an empathetic state of the same shape with components in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImaginationNetwork<S> {
    variant: Variant,
    cell_coordinates: bool,
    /// Feature: `[cell, button]`. Image: `[whole]`.
    nets: Vec<Mlp<S>>,
}

/// Gradient buffers matching an [`ImaginationNetwork`].
#[derive(Clone, Debug, PartialEq)]
pub struct ImaginationGrads<S> {
    parts: Vec<Gradients<S>>,
}

impl<S: Scalar> ImaginationGrads<S> {
    pub fn clear(&mut self) {
        self.parts.iter_mut().for_each(Gradients::clear);
    }

    pub fn scale(&mut self, k: S) {
        self.parts.iter_mut().for_each(|g| g.scale(k));
    }

    pub fn is_finite(&self) -> bool {
        self.parts.iter().all(Gradients::is_finite)
    }
}

/// Intermediate values of a batched forward pass.
pub struct ImagineCache<S> {
    batch: usize,
    caches: Vec<ForwardCache<S>>,
    /// Feature variant: row of the cell network's (deduplicated) batch used
    /// by each `(sample, cell)`.
    cell_rows: Vec<usize>,
    output: Vec<S>,
}

impl<S: Scalar> ImagineCache<S> {
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Empathetic states, `[batch, OBS_DIM]` row-major.
    pub fn output(&self) -> &[S] {
        &self.output
    }

    pub fn row(&self, b: usize) -> &[S] {
        &self.output[b * OBS_DIM..(b + 1) * OBS_DIM]
    }
}

const COORD_WIDTH: usize = 2;

fn layer_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = vec![input];
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

impl<S: Scalar> ImaginationNetwork<S> {
    pub fn new<R: Rng + ?Sized>(variant: Variant, config: &ImaginationConfig, rng: &mut R) -> Self {
        let mut nets = match variant {
            Variant::Feature => {
                let width = CHANNELS + if config.cell_coordinates { COORD_WIDTH } else { 0 };
                vec![
                    Mlp::new(
                        &layer_sizes(width, &config.hidden, CHANNELS),
                        Activation::Relu,
                        Activation::Sigmoid,
                        rng,
                    ),
                    Mlp::new(&[1, 1], Activation::Identity, Activation::Sigmoid, rng),
                ]
            }
            Variant::Image => vec![Mlp::new(
                &layer_sizes(OBS_DIM, &config.hidden, OBS_DIM),
                Activation::Relu,
                Activation::Sigmoid,
                rng,
            )],
        };
        let identity = match config.init {
            Init::Random => false,
            Init::Identity => {
                assert!(
                    config.identity_fits(variant),
                    "hidden layers too narrow for identity init"
                );
                true
            }
            Init::Auto => config.identity_fits(variant),
        };
        if identity {
            embed_identity(&mut nets[0], passthrough_width(variant), config.identity_gain);
            if variant == Variant::Feature {
                embed_identity(&mut nets[1], 1, config.identity_gain);
            }
        }
        Self {
            variant,
            cell_coordinates: variant == Variant::Feature && config.cell_coordinates,
            nets,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn networks(&self) -> &[Mlp<S>] {
        &self.nets
    }

    pub fn networks_mut(&mut self) -> &mut [Mlp<S>] {
        &mut self.nets
    }

    pub fn zero_grads(&self) -> ImaginationGrads<S> {
        ImaginationGrads {
            parts: self.nets.iter().map(Mlp::zero_grads).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.nets.iter().all(Mlp::is_finite)
    }

    pub fn parameter_count(&self) -> usize {
        self.nets.iter().map(Mlp::parameter_count).sum()
    }

    fn cell_width(&self) -> usize {
        CHANNELS + if self.cell_coordinates { COORD_WIDTH } else { 0 }
    }

    /// Batched forward over `batch` encoded observations packed in `s_i`.
    ///
    /// Panics on a shape mismatch.
    pub fn forward(&self, s_i: &[S], batch: usize) -> ImagineCache<S> {
        assert_eq!(s_i.len(), batch * OBS_DIM, "imagination input has the wrong shape");
        match self.variant {
            Variant::Image => {
                let c = self.nets[0].forward_slice(s_i, batch);
                let output = c.output().to_vec();
                ImagineCache {
                    batch,
                    caches: vec![c],
                    cell_rows: Vec::new(),
                    output,
                }
            }
            Variant::Feature => {
                // Observed cells are one-hot, so a batch holds few distinct
                // cell inputs; the shared network runs once per distinct row.
                let w = self.cell_width();
                let mut unique: HashMap<Vec<u64>, usize> = HashMap::new();
                let mut cells = Vec::new();
                let mut cell_rows = Vec::with_capacity(batch * CELLS);
                let mut buttons = Vec::with_capacity(batch);
                let scale = S::of(1.0 / (VIEW - 1) as f64);
                let mut input = Vec::with_capacity(w);
                for b in 0..batch {
                    let row = &s_i[b * OBS_DIM..(b + 1) * OBS_DIM];
                    for cell in 0..CELLS {
                        input.clear();
                        input.extend_from_slice(&row[cell * CHANNELS..(cell + 1) * CHANNELS]);
                        if self.cell_coordinates {
                            input.push(S::of((cell / VIEW) as f64) * scale);
                            input.push(S::of((cell % VIEW) as f64) * scale);
                        }
                        let key: Vec<u64> = input.iter().map(|v| v.as_f64().to_bits()).collect();
                        let next = unique.len();
                        let idx = *unique.entry(key).or_insert_with(|| {
                            cells.extend_from_slice(&input);
                            next
                        });
                        cell_rows.push(idx);
                    }
                    buttons.push(row[BUTTON_INDEX]);
                }
                let cc = self.nets[0].forward_slice(&cells, unique.len());
                let bc = self.nets[1].forward_slice(&buttons, batch);
                let mut output = Vec::with_capacity(batch * OBS_DIM);
                for b in 0..batch {
                    for &r in &cell_rows[b * CELLS..(b + 1) * CELLS] {
                        output.extend_from_slice(cc.output_row(r));
                    }
                    output.push(bc.output()[b]);
                }
                ImagineCache {
                    batch,
                    caches: vec![cc, bc],
                    cell_rows,
                    output,
                }
            }
        }
    }

    /// Empathetic state of one observation.
    pub fn imagine(&self, s_i: &[S]) -> Vec<S> {
        self.forward(s_i, 1).output
    }

    /// Accumulates parameter gradients for `grad_output` (same shape as the output).
    pub fn backward(&self, cache: &ImagineCache<S>, grad_output: &[S], grads: &mut ImaginationGrads<S>) {
        let batch = cache.batch;
        assert_eq!(grad_output.len(), batch * OBS_DIM);
        match self.variant {
            Variant::Image => self.nets[0].accumulate_gradients(&cache.caches[0], grad_output, &mut grads.parts[0]),
            Variant::Feature => {
                let rows = cache.caches[0].batch();
                let mut gc = vec![S::zero(); rows * CHANNELS];
                let mut gb = Vec::with_capacity(batch);
                for b in 0..batch {
                    let row = &grad_output[b * OBS_DIM..(b + 1) * OBS_DIM];
                    for cell in 0..CELLS {
                        let r = cache.cell_rows[b * CELLS + cell];
                        let src = &row[cell * CHANNELS..(cell + 1) * CHANNELS];
                        for (d, &g) in gc[r * CHANNELS..(r + 1) * CHANNELS].iter_mut().zip(src) {
                            *d += g;
                        }
                    }
                    gb.push(row[BUTTON_INDEX]);
                }
                let (a, rest) = grads.parts.split_at_mut(1);
                self.nets[0].accumulate_gradients(&cache.caches[0], &gc, &mut a[0]);
                self.nets[1].accumulate_gradients(&cache.caches[1], &gb, &mut rest[0]);
            }
        }
    }

    fn names(&self) -> &'static [&'static str] {
        match self.variant {
            Variant::Feature => &["imagine_cell", "imagine_button"],
            Variant::Image => &["imagine_image"],
        }
    }

    /// Adds this network's parts to a checkpoint.
    pub fn store(&self, mut ckpt: Checkpoint<S>) -> Checkpoint<S> {
        for (name, net) in self.names().iter().zip(&self.nets) {
            ckpt = ckpt.with(name, net);
        }
        ckpt
    }

    /// Restores a network stored with [`store`](Self::store).
    pub fn load(variant: Variant, ckpt: &Checkpoint<S>) -> Result<Self> {
        let names: &[&str] = match variant {
            Variant::Feature => &["imagine_cell", "imagine_button"],
            Variant::Image => &["imagine_image"],
        };
        let nets: Vec<Mlp<S>> = names.iter().map(|n| ckpt.get(n).cloned()).collect::<Result<_>>()?;
        let cell_coordinates = match variant {
            Variant::Feature => match nets[0].input_dim() {
                CHANNELS => false,
                w if w == CHANNELS + COORD_WIDTH => true,
                w => return Err(Error::Checkpoint(format!("cell network takes {w} inputs"))),
            },
            Variant::Image => {
                if nets[0].input_dim() != OBS_DIM || nets[0].output_dim() != OBS_DIM {
                    return Err(Error::Checkpoint("image network has the wrong width".into()));
                }
                false
            }
        };
        Ok(Self {
            variant,
            cell_coordinates,
            nets,
        })
    }
}

impl<S: Scalar> Parameters<S> for ImaginationNetwork<S> {
    fn slices(&self) -> Vec<&[S]> {
        self.nets.iter().flat_map(|n| n.slices()).collect()
    }

    fn slices_mut(&mut self) -> Vec<&mut [S]> {
        self.nets.iter_mut().flat_map(|n| n.slices_mut()).collect()
    }
}

impl<S: Scalar> Parameters<S> for ImaginationGrads<S> {
    fn slices(&self) -> Vec<&[S]> {
        self.parts.iter().flat_map(|g| g.slices()).collect()
    }

    fn slices_mut(&mut self) -> Vec<&mut [S]> {
        self.parts.iter_mut().flat_map(|g| g.slices_mut()).collect()
    }
}
