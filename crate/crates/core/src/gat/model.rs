use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::AttentionGraph;
use super::ops::{elu, elu_grad, head_mean, leaky_relu, leaky_relu_grad, normalize_scores};
use super::{Activation, AttentionHeadParams, GatError};
use crate::aggregator::FeatureMatrix;
use crate::rdf2vec::EmbeddingMatrix;

/// Number of output classes of every per-trait classifier.
pub const CLASSES: usize = 2;

/// Layer widths of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelShape {
    /// Input feature count (entity vocabulary size).
    pub features: usize,
    /// Width of the dense input projection.
    pub dense_units: usize,
    /// Output width of every attention layer.
    pub hidden_units: usize,
    pub heads: usize,
    pub layers: usize,
    /// Width of the appended node embedding; 0 when not enriched.
    pub embedding_dim: usize,
}

impl ModelShape {
    pub fn classifier_inputs(&self) -> usize {
        self.layers * self.hidden_units + self.embedding_dim
    }

    pub fn enriched(&self) -> bool {
        self.embedding_dim > 0
    }

    pub fn validate(&self) -> Result<(), GatError> {
        if self.dense_units == 0 || self.hidden_units == 0 || self.heads == 0 || self.layers == 0 {
            return Err(GatError::InvalidConfig("layer widths and counts must be positive".into()));
        }
        Ok(())
    }
}

/// The heads of one multi-head attention layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GatLayerParams {
    pub heads: Vec<AttentionHeadParams>,
}

impl GatLayerParams {
    fn zeros(heads: usize, out_dim: usize, in_dim: usize) -> Self {
        Self {
            heads: (0..heads)
                .map(|_| AttentionHeadParams {
                    w: Array2::zeros((out_dim, in_dim)),
                    a: Array1::zeros(2 * out_dim),
                })
                .collect(),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.heads[0].out_dim()
    }

    /// All head transforms stacked row-wise: `(L * F') x F`.
    fn stacked_w(&self) -> Array2<f64> {
        let views: Vec<_> = self.heads.iter().map(|h| h.w.view()).collect();
        ndarray::concatenate(Axis(0), &views).expect("heads share input width")
    }
}

/// Every trainable tensor of a model. Gradients use the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct GatParams {
    /// Dense input projection stored feature-major: `F x D`.
    pub input_w: Array2<f64>,
    pub input_b: Array1<f64>,
    pub layers: Vec<GatLayerParams>,
    /// Classifier head: `2 x C`.
    pub out_w: Array2<f64>,
    pub out_b: Array1<f64>,
}

fn glorot<R: Rng>(rng: &mut R, values: &mut [f64], fan_in: usize, fan_out: usize) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in values {
        *v = rng.gen_range(-limit..limit);
    }
}

impl GatParams {
    pub fn zeros(shape: &ModelShape) -> Self {
        let layers = (0..shape.layers)
            .map(|k| {
                let in_dim = if k == 0 { shape.dense_units } else { shape.hidden_units };
                GatLayerParams::zeros(shape.heads, shape.hidden_units, in_dim)
            })
            .collect();
        Self {
            input_w: Array2::zeros((shape.features, shape.dense_units)),
            input_b: Array1::zeros(shape.dense_units),
            layers,
            out_w: Array2::zeros((CLASSES, shape.classifier_inputs())),
            out_b: Array1::zeros(CLASSES),
        }
    }

    /// Glorot-uniform weights and attention vectors, zero biases.
    pub fn init<R: Rng>(shape: &ModelShape, rng: &mut R) -> Self {
        let mut p = Self::zeros(shape);
        let (f, d) = (shape.features, shape.dense_units);
        glorot(rng, p.input_w.as_slice_mut().unwrap(), f, d);
        for layer in &mut p.layers {
            for head in &mut layer.heads {
                let (out, inp) = head.w.dim();
                glorot(rng, head.w.as_slice_mut().unwrap(), inp, out);
                glorot(rng, head.a.as_slice_mut().unwrap(), 2 * out, 1);
            }
        }
        glorot(rng, p.out_w.as_slice_mut().unwrap(), shape.classifier_inputs(), CLASSES);
        p
    }

    /// Visits every tensor in a fixed order with its name.
    pub fn for_each(&self, mut f: impl FnMut(&str, &[f64])) {
        f("input_w", self.input_w.as_slice().unwrap());
        f("input_b", self.input_b.as_slice().unwrap());
        for (k, layer) in self.layers.iter().enumerate() {
            for (l, head) in layer.heads.iter().enumerate() {
                f(&format!("layer{k}.head{l}.w"), head.w.as_slice().unwrap());
                f(&format!("layer{k}.head{l}.a"), head.a.as_slice().unwrap());
            }
        }
        f("out_w", self.out_w.as_slice().unwrap());
        f("out_b", self.out_b.as_slice().unwrap());
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&str, &mut [f64])) {
        f("input_w", self.input_w.as_slice_mut().unwrap());
        f("input_b", self.input_b.as_slice_mut().unwrap());
        for (k, layer) in self.layers.iter_mut().enumerate() {
            for (l, head) in layer.heads.iter_mut().enumerate() {
                f(&format!("layer{k}.head{l}.w"), head.w.as_slice_mut().unwrap());
                f(&format!("layer{k}.head{l}.a"), head.a.as_slice_mut().unwrap());
            }
        }
        f("out_w", self.out_w.as_slice_mut().unwrap());
        f("out_b", self.out_b.as_slice_mut().unwrap());
    }

    /// Applies `f(param, other)` elementwise against a same-shaped set.
    pub fn zip_mut(&mut self, other: &GatParams, mut f: impl FnMut(&mut f64, f64)) {
        let mut theirs = Vec::new();
        other.for_each(|_, v| theirs.push(v.to_vec()));
        let mut it = theirs.into_iter();
        self.for_each_mut(|_, mine| {
            let t = it.next().expect("same layout");
            for (m, &o) in mine.iter_mut().zip(&t) {
                f(m, o);
            }
        });
    }

    pub fn len(&self) -> usize {
        let mut n = 0;
        self.for_each(|_, v| n += v.len());
        n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all_finite(&self) -> bool {
        let mut ok = true;
        self.for_each(|_, v| ok &= v.iter().all(|x| x.is_finite()));
        ok
    }
}

/// A per-trait classifier: shape plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GatModel {
    pub shape: ModelShape,
    pub params: GatParams,
}

/// Graph-side inputs shared by every forward pass.
#[derive(Debug, Clone, Copy)]
pub struct GraphInputs<'a> {
    pub graph: &'a AttentionGraph,
    pub features: &'a FeatureMatrix,
    pub embeddings: Option<&'a EmbeddingMatrix>,
}

impl<'a> GraphInputs<'a> {
    pub fn new(graph: &'a AttentionGraph, features: &'a FeatureMatrix) -> Self {
        Self { graph, features, embeddings: None }
    }

    pub fn with_embeddings(mut self, embeddings: Option<&'a EmbeddingMatrix>) -> Self {
        self.embeddings = embeddings;
        self
    }
}

/// Intermediate values of one attention layer kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct LayerTrace {
    input: Array2<f64>,
    z: Array2<f64>,
    /// Per head, per edge slot: pre-activation score and coefficient.
    pre: Vec<Vec<f64>>,
    alpha: Vec<Vec<f64>>,
    /// Pre-activation layer output.
    u: Array2<f64>,
}

impl LayerTrace {
    pub(crate) fn alpha(&self) -> &[Vec<f64>] {
        &self.alpha
    }
}

/// Multi-head attention layer: per-head attention-weighted neighbor sums,
/// averaged over heads, then `activation`.
pub fn multi_head_layer(
    graph: &AttentionGraph,
    h: &Array2<f64>,
    layer: &GatLayerParams,
    activation: Activation,
) -> Result<Array2<f64>, GatError> {
    Ok(layer_forward(graph, h, layer, activation)?.0)
}

pub(crate) fn layer_forward(
    graph: &AttentionGraph,
    h: &Array2<f64>,
    layer: &GatLayerParams,
    activation: Activation,
) -> Result<(Array2<f64>, LayerTrace), GatError> {
    let n = graph.node_count();
    if layer.heads.is_empty() {
        return Err(GatError::InvalidConfig("layer has no heads".into()));
    }
    for head in &layer.heads {
        head.check()?;
        if head.in_dim() != h.ncols() || head.out_dim() != layer.out_dim() {
            return Err(GatError::ShapeMismatch(format!(
                "head is {}x{}, layer input has {} columns",
                head.out_dim(),
                head.in_dim(),
                h.ncols()
            )));
        }
    }
    if h.nrows() != n {
        return Err(GatError::ShapeMismatch(format!("{} feature rows for {n} nodes", h.nrows())));
    }
    let fo = layer.out_dim();
    let heads = layer.heads.len();
    let z = h.dot(&layer.stacked_w().t());
    let targets = graph.targets();
    let mut pre = Vec::with_capacity(heads);
    let mut alpha = Vec::with_capacity(heads);
    let mut aggs = Vec::with_capacity(heads);
    for (l, head) in layer.heads.iter().enumerate() {
        let zl = z.slice(s![.., l * fo..(l + 1) * fo]);
        let s_src = zl.dot(&head.a.slice(s![..fo]));
        let s_dst = zl.dot(&head.a.slice(s![fo..]));
        let mut pre_l = vec![0.0; graph.edge_count()];
        let mut alpha_l = vec![0.0; graph.edge_count()];
        let mut agg = Array2::<f64>::zeros((n, fo));
        for i in 0..n {
            let range = graph.edge_range(i);
            let scores: Vec<f64> = range
                .clone()
                .map(|e| {
                    pre_l[e] = s_src[i] + s_dst[targets[e]];
                    leaky_relu(pre_l[e])
                })
                .collect();
            let coeffs = normalize_scores(&scores);
            let mut row = agg.row_mut(i);
            for (e, c) in range.zip(coeffs) {
                alpha_l[e] = c;
                row.scaled_add(c, &zl.row(targets[e]));
            }
        }
        pre.push(pre_l);
        alpha.push(alpha_l);
        aggs.push(agg);
    }
    let u = if heads == 1 {
        aggs.pop().unwrap()
    } else {
        let mut u = Array2::<f64>::zeros((n, fo));
        let mut buf = vec![0.0; heads];
        for ((i, f), out) in u.indexed_iter_mut() {
            for (b, agg) in buf.iter_mut().zip(&aggs) {
                *b = agg[[i, f]];
            }
            *out = head_mean(&buf);
        }
        u
    };
    let out = u.mapv(|x| activation.apply(x));
    Ok((out, LayerTrace { input: h.clone(), z, pre, alpha, u }))
}

/// Backpropagates `d_out` through one layer, accumulating parameter
/// gradients into `grads` and returning the gradient w.r.t. the input.
pub(crate) fn layer_backward(
    graph: &AttentionGraph,
    layer: &GatLayerParams,
    trace: &LayerTrace,
    d_out: &Array2<f64>,
    activation: Activation,
    grads: &mut GatLayerParams,
) -> Array2<f64> {
    let n = graph.node_count();
    let fo = layer.out_dim();
    let heads = layer.heads.len();
    let scale = 1.0 / heads as f64;
    let d_agg = match activation {
        Activation::Identity => d_out * scale,
        Activation::Elu => {
            let mut d = d_out.clone();
            d.zip_mut_with(&trace.u, |g, &u| *g *= elu_grad(u) * scale);
            d
        }
    };
    let targets = graph.targets();
    let mut dz = Array2::<f64>::zeros(trace.z.raw_dim());
    for (l, head) in layer.heads.iter().enumerate() {
        let zl = trace.z.slice(s![.., l * fo..(l + 1) * fo]);
        let (pre, alpha) = (&trace.pre[l], &trace.alpha[l]);
        let mut ds_src = Array1::<f64>::zeros(n);
        let mut ds_dst = Array1::<f64>::zeros(n);
        {
            let mut dzl = dz.slice_mut(s![.., l * fo..(l + 1) * fo]);
            let mut d_alpha = Vec::new();
            for i in 0..n {
                let g_i = d_agg.row(i);
                let range = graph.edge_range(i);
                d_alpha.clear();
                let mut weighted = 0.0;
                for e in range.clone() {
                    let j = targets[e];
                    let da = g_i.dot(&zl.row(j));
                    weighted += alpha[e] * da;
                    d_alpha.push(da);
                    dzl.row_mut(j).scaled_add(alpha[e], &g_i);
                }
                for (e, da) in range.zip(&d_alpha) {
                    let d_pre = alpha[e] * (da - weighted) * leaky_relu_grad(pre[e]);
                    ds_src[i] += d_pre;
                    ds_dst[targets[e]] += d_pre;
                }
            }
            let a_src = head.a.slice(s![..fo]);
            let a_dst = head.a.slice(s![fo..]);
            for i in 0..n {
                let mut row = dzl.row_mut(i);
                row.scaled_add(ds_src[i], &a_src);
                row.scaled_add(ds_dst[i], &a_dst);
            }
        }
        let ga = &mut grads.heads[l].a;
        let src_grad = zl.t().dot(&ds_src);
        let dst_grad = zl.t().dot(&ds_dst);
        ga.slice_mut(s![..fo]).zip_mut_with(&src_grad, |g, &v| *g += v);
        ga.slice_mut(s![fo..]).zip_mut_with(&dst_grad, |g, &v| *g += v);
    }
    let dw = dz.t().dot(&trace.input);
    for (l, head) in grads.heads.iter_mut().enumerate() {
        head.w.zip_mut_with(&dw.slice(s![l * fo..(l + 1) * fo, ..]), |g, &v| *g += v);
    }
    dz.dot(&layer.stacked_w())
}

/// Full forward trace of a model over the whole graph.
#[derive(Debug, Clone)]
pub(crate) struct ForwardTrace {
    pre0: Array2<f64>,
    pub(crate) layers: Vec<LayerTrace>,
    pub(crate) outputs: Vec<Array2<f64>>,
}

impl GatModel {
    pub fn new(shape: ModelShape, params: GatParams) -> Self {
        Self { shape, params }
    }

    pub fn init<R: Rng>(shape: ModelShape, rng: &mut R) -> Self {
        let params = GatParams::init(&shape, rng);
        Self { shape, params }
    }

    fn check_inputs(&self, inputs: &GraphInputs) -> Result<(), GatError> {
        let n = inputs.graph.node_count();
        if inputs.features.rows() != n || inputs.features.cols() != self.shape.features {
            return Err(GatError::ShapeMismatch(format!(
                "features are {}x{}, model expects {n}x{}",
                inputs.features.rows(),
                inputs.features.cols(),
                self.shape.features
            )));
        }
        match (self.shape.enriched(), inputs.embeddings) {
            (true, None) => Err(GatError::MissingEmbedding),
            (false, Some(_)) => Err(GatError::ShapeMismatch(
                "embeddings supplied to a model without an embedding input".into(),
            )),
            (true, Some(e)) if e.len() != n || e.dim() != self.shape.embedding_dim => {
                Err(GatError::ShapeMismatch(format!(
                    "embeddings are {}x{}, model expects {n}x{}",
                    e.len(),
                    e.dim(),
                    self.shape.embedding_dim
                )))
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn trace(&self, inputs: &GraphInputs) -> Result<ForwardTrace, GatError> {
        self.check_inputs(inputs)?;
        let n = inputs.graph.node_count();
        let p = &self.params;
        let mut pre0 = Array2::<f64>::zeros((n, self.shape.dense_units));
        for (i, mut row) in pre0.outer_iter_mut().enumerate() {
            row.assign(&p.input_b);
            for &c in inputs.features.row(i) {
                row += &p.input_w.row(c as usize);
            }
        }
        let mut h = pre0.mapv(elu);
        let mut layers = Vec::with_capacity(p.layers.len());
        let mut outputs = Vec::with_capacity(p.layers.len());
        for layer in &p.layers {
            let (out, trace) = layer_forward(inputs.graph, &h, layer, Activation::Elu)?;
            layers.push(trace);
            outputs.push(out.clone());
            h = out;
        }
        Ok(ForwardTrace { pre0, layers, outputs })
    }

    /// Classifier input for `node`: every layer's output row, concatenated,
    /// followed by the node embedding when enriched.
    fn representation(
        &self,
        trace: &ForwardTrace,
        embeddings: Option<&EmbeddingMatrix>,
        node: usize,
    ) -> Array1<f64> {
        let mut rep = Vec::with_capacity(self.shape.classifier_inputs());
        for out in &trace.outputs {
            rep.extend(out.row(node).iter().copied());
        }
        if let Some(e) = embeddings {
            rep.extend(e.row(node).iter().copied());
        }
        Array1::from(rep)
    }

    fn logits(&self, rep: ArrayView1<f64>) -> [f64; CLASSES] {
        let z = self.params.out_w.dot(&rep) + &self.params.out_b;
        [z[0], z[1]]
    }

    /// Class probabilities for each node in `nodes`.
    pub fn probabilities(
        &self,
        inputs: &GraphInputs,
        nodes: &[usize],
    ) -> Result<Vec<[f64; CLASSES]>, GatError> {
        let trace = self.trace(inputs)?;
        Ok(nodes
            .iter()
            .map(|&node| {
                let rep = self.representation(&trace, inputs.embeddings, node);
                softmax2(self.logits(rep.view()))
            })
            .collect())
    }

    /// Mean cross-entropy over `nodes` and the gradient of every parameter.
    pub fn loss_and_gradients(
        &self,
        inputs: &GraphInputs,
        nodes: &[usize],
        targets: &[u8],
    ) -> Result<(f64, GatParams), GatError> {
        if nodes.len() != targets.len() || nodes.is_empty() {
            return Err(GatError::ShapeMismatch("one target per batch node required".into()));
        }
        let trace = self.trace(inputs)?;
        let n = inputs.graph.node_count();
        let p = &self.params;
        let mut grads = GatParams::zeros(&self.shape);
        let hidden = self.shape.hidden_units;
        let mut d_outputs: Vec<Array2<f64>> =
            (0..p.layers.len()).map(|_| Array2::zeros((n, hidden))).collect();
        let batch = nodes.len() as f64;
        let mut loss = 0.0;
        for (&node, &y) in nodes.iter().zip(targets) {
            let rep = self.representation(&trace, inputs.embeddings, node);
            let logits = self.logits(rep.view());
            let log_p = log_softmax2(logits);
            loss -= log_p[y as usize];
            let mut d_logits = [log_p[0].exp(), log_p[1].exp()];
            d_logits[y as usize] -= 1.0;
            for (c, d) in d_logits.iter().enumerate() {
                let d = d / batch;
                grads.out_b[c] += d;
                grads.out_w.row_mut(c).scaled_add(d, &rep);
            }
            let d_rep = p.out_w.t().dot(&Array1::from(d_logits.to_vec())) / batch;
            for (k, d_out) in d_outputs.iter_mut().enumerate() {
                let mut row = d_out.row_mut(node);
                row += &d_rep.slice(s![k * hidden..(k + 1) * hidden]);
            }
        }
        loss /= batch;
        if !loss.is_finite() {
            return Err(GatError::NonFiniteLoss);
        }
        let mut d_h = d_outputs.pop().unwrap_or_else(|| Array2::zeros((n, hidden)));
        for k in (0..p.layers.len()).rev() {
            let d_in = layer_backward(
                inputs.graph,
                &p.layers[k],
                &trace.layers[k],
                &d_h,
                Activation::Elu,
                &mut grads.layers[k],
            );
            d_h = match k.checked_sub(1) {
                Some(prev) => d_in + &d_outputs[prev],
                None => d_in,
            };
        }
        // dense projection
        d_h.zip_mut_with(&trace.pre0, |g, &x| *g *= elu_grad(x));
        for (i, d_row) in d_h.outer_iter().enumerate() {
            grads.input_b += &d_row;
            for &c in inputs.features.row(i) {
                let mut w = grads.input_w.row_mut(c as usize);
                w += &d_row;
            }
        }
        Ok((loss, grads))
    }

    /// Binary predictions; an exact tie goes to class 0.
    pub fn predict(&self, inputs: &GraphInputs, nodes: &[usize]) -> Result<Vec<u8>, GatError> {
        Ok(self.probabilities(inputs, nodes)?.into_iter().map(predicted_class).collect())
    }
}

pub fn predicted_class(p: [f64; CLASSES]) -> u8 {
    u8::from(p[1] > p[0])
}

fn softmax2(z: [f64; CLASSES]) -> [f64; CLASSES] {
    let lp = log_softmax2(z);
    [lp[0].exp(), lp[1].exp()]
}

fn log_softmax2(z: [f64; CLASSES]) -> [f64; CLASSES] {
    let m = z[0].max(z[1]);
    let lse = m + ((z[0] - m).exp() + (z[1] - m).exp()).ln();
    [z[0] - lse, z[1] - lse]
}

/// Cross-entropy of a probability pair against a binary target.
pub fn cross_entropy(p: [f64; CLASSES], target: u8) -> f64 {
    -p[target as usize].ln()
}
