//! Parametrized L-layer fully-connected network: forward propagation,
//! regularized cross-entropy cost, and backward propagation.
//!
//! Layer i maps activations through `Z_i = W_i A_{i-1} + b_i`,
//! `A_i = sigma_i(Z_i)`, with `W_i` of shape `n_i x n_{i-1}` and `b_i` a
//! column vector. The output layer is always a single sigmoid unit so `A_L`
//! is a row of probabilities for the positive class.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

/// Lower clamp applied to log arguments in the cost so saturated sigmoid
/// outputs cannot produce -inf.
pub const LOG_CLAMP: f64 = 1e-12;

/// Slope of leaky ReLU on the negative side.
pub const LEAKY_SLOPE: f64 = 0.01;

/// Per-layer activation function. The numeric codes appear in configuration
/// vectors and in the model file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    LeakyRelu,
}

impl Activation {
    pub fn from_code(code: u32) -> Result<Self> {
        match code {
            1 => Ok(Activation::Relu),
            2 => Ok(Activation::Sigmoid),
            3 => Ok(Activation::Tanh),
            4 => Ok(Activation::LeakyRelu),
            other => Err(Error::argument(format!(
                "unknown activation code {other}, expected 1 (relu), 2 (sigmoid), 3 (tanh) or 4 (leaky relu)"
            ))),
        }
    }

    pub fn code(self) -> u32 {
        match self {
            Activation::Relu => 1,
            Activation::Sigmoid => 2,
            Activation::Tanh => 3,
            Activation::LeakyRelu => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::LeakyRelu => "leaky_relu",
        }
    }

    fn eval(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => stable_sigmoid(z),
            Activation::Tanh => z.tanh(),
            Activation::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    LEAKY_SLOPE * z
                }
            }
        }
    }

    // Derivative at z. The kink of the ReLU family at z = 0 takes the
    // right-hand value 1 so results are deterministic.
    fn eval_derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = stable_sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Tanh => 1.0 - z.tanh().powi(2),
            Activation::LeakyRelu => {
                if z >= 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
        }
    }
}

fn stable_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Elementwise activation over a matrix.
pub fn activation(kind: Activation, z: &Matrix) -> Matrix {
    z.map(|v| kind.eval(v))
}

/// Elementwise activation derivative evaluated at `z`.
pub fn activation_derivative(kind: Activation, z: &Matrix) -> Matrix {
    z.map(|v| kind.eval_derivative(v))
}

/// The configuration vector that fully determines a network and its training
/// regime: layer count and sizes, per-layer activations, learning rate,
/// regularization strength, batch size, and epoch count.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
    learning_rate: f64,
    reg_alpha: f64,
    batch_size: usize,
    epochs: usize,
}

impl HyperParams {
    pub fn new(
        layer_sizes: Vec<usize>,
        activations: Vec<Activation>,
        learning_rate: f64,
        reg_alpha: f64,
        batch_size: usize,
        epochs: usize,
    ) -> Result<Self> {
        if layer_sizes.is_empty() {
            return Err(Error::argument("network needs at least one layer"));
        }
        if layer_sizes.len() != activations.len() {
            return Err(Error::argument(format!(
                "{} layer sizes but {} activations",
                layer_sizes.len(),
                activations.len()
            )));
        }
        if layer_sizes.iter().any(|&n| n == 0) {
            return Err(Error::argument("layer sizes must be positive"));
        }
        if *layer_sizes.last().unwrap() != 1 {
            return Err(Error::argument(
                "binary classification requires the output layer to have one unit",
            ));
        }
        if *activations.last().unwrap() != Activation::Sigmoid {
            return Err(Error::argument(
                "binary classification requires a sigmoid output layer",
            ));
        }
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::argument(format!(
                "learning rate must be positive and finite, got {learning_rate}"
            )));
        }
        if !(reg_alpha >= 0.0 && reg_alpha.is_finite()) {
            return Err(Error::argument(format!(
                "regularization strength must be non-negative and finite, got {reg_alpha}"
            )));
        }
        if batch_size == 0 {
            return Err(Error::argument("batch size must be positive"));
        }
        Ok(HyperParams {
            layer_sizes,
            activations,
            learning_rate,
            reg_alpha,
            batch_size,
            epochs,
        })
    }

    /// Number of layers L.
    pub fn layers(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn reg_alpha(&self) -> f64 {
        self.reg_alpha
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn with_learning_rate(mut self, learning_rate: f64) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::argument(format!(
                "learning rate must be positive and finite, got {learning_rate}"
            )));
        }
        self.learning_rate = learning_rate;
        Ok(self)
    }

    pub fn with_reg_alpha(mut self, reg_alpha: f64) -> Result<Self> {
        if !(reg_alpha >= 0.0 && reg_alpha.is_finite()) {
            return Err(Error::argument(format!(
                "regularization strength must be non-negative and finite, got {reg_alpha}"
            )));
        }
        self.reg_alpha = reg_alpha;
        Ok(self)
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::argument("batch size must be positive"));
        }
        self.batch_size = batch_size;
        Ok(self)
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    /// Flat space-separated form
    /// `L n1..nL code1..codeL lambda alpha nb epochs`, used in CSV output
    /// and config files.
    pub fn to_flat_string(&self) -> String {
        let mut parts: Vec<String> = vec![self.layers().to_string()];
        parts.extend(self.layer_sizes.iter().map(usize::to_string));
        parts.extend(self.activations.iter().map(|a| a.code().to_string()));
        parts.push(self.learning_rate.to_string());
        parts.push(self.reg_alpha.to_string());
        parts.push(self.batch_size.to_string());
        parts.push(self.epochs.to_string());
        parts.join(" ")
    }

    /// Parse the flat form written by [`HyperParams::to_flat_string`].
    pub fn from_flat_string(text: &str) -> Result<Self> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(Error::argument("empty hyperparameter vector"));
        }
        let l: usize = tokens[0]
            .parse()
            .map_err(|_| Error::argument(format!("bad layer count {:?}", tokens[0])))?;
        let expected = 1 + 2 * l + 4;
        if tokens.len() != expected {
            return Err(Error::argument(format!(
                "hyperparameter vector for L={l} needs {expected} fields, found {}",
                tokens.len()
            )));
        }
        let mut sizes = Vec::with_capacity(l);
        for t in &tokens[1..1 + l] {
            sizes.push(
                t.parse()
                    .map_err(|_| Error::argument(format!("bad layer size {t:?}")))?,
            );
        }
        let mut acts = Vec::with_capacity(l);
        for t in &tokens[1 + l..1 + 2 * l] {
            let code: u32 = t
                .parse()
                .map_err(|_| Error::argument(format!("bad activation code {t:?}")))?;
            acts.push(Activation::from_code(code)?);
        }
        let tail = &tokens[1 + 2 * l..];
        let learning_rate: f64 = tail[0]
            .parse()
            .map_err(|_| Error::argument(format!("bad learning rate {:?}", tail[0])))?;
        let reg_alpha: f64 = tail[1]
            .parse()
            .map_err(|_| Error::argument(format!("bad regularization strength {:?}", tail[1])))?;
        let batch_size: usize = tail[2]
            .parse()
            .map_err(|_| Error::argument(format!("bad batch size {:?}", tail[2])))?;
        let epochs: usize = tail[3]
            .parse()
            .map_err(|_| Error::argument(format!("bad epoch count {:?}", tail[3])))?;
        HyperParams::new(sizes, acts, learning_rate, reg_alpha, batch_size, epochs)
    }
}

/// Trained parameters plus the configuration that shaped them.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    weights: Vec<Matrix>,
    biases: Vec<Matrix>,
    hp: HyperParams,
    n_input: usize,
}

/// All intermediate values of one forward pass; `a[0]` is the input batch.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub z: Vec<Matrix>,
    pub a: Vec<Matrix>,
}

impl ForwardTrace {
    /// Network output `A_L`, a 1 x nb row of probabilities.
    pub fn output(&self) -> &Matrix {
        self.a.last().expect("trace holds at least the input")
    }
}

/// Cost gradients with respect to every weight matrix and bias vector.
#[derive(Debug, Clone)]
pub struct GradientSet {
    pub dw: Vec<Matrix>,
    pub db: Vec<Matrix>,
}

/// Initialize a model: weights are zero-mean Gaussian scaled by
/// `sqrt(2/n_{i-1})` for ReLU-family layers and `sqrt(1/n_{i-1})` for
/// sigmoid/tanh layers; biases start at zero. Entries are drawn layer by
/// layer in row-major order from the pinned generator, so a seed fully
/// determines the model.
pub fn init_model(hp: &HyperParams, n_input: usize, seed: u64) -> Result<Model> {
    if n_input == 0 {
        return Err(Error::argument("input feature count must be positive"));
    }
    let mut rng = Rng::new(seed);
    let mut weights = Vec::with_capacity(hp.layers());
    let mut biases = Vec::with_capacity(hp.layers());
    let mut fan_in = n_input;
    for (i, &n_out) in hp.layer_sizes.iter().enumerate() {
        let std = match hp.activations[i] {
            Activation::Relu | Activation::LeakyRelu => (2.0 / fan_in as f64).sqrt(),
            Activation::Sigmoid | Activation::Tanh => (1.0 / fan_in as f64).sqrt(),
        };
        let w = Matrix::from_fn(n_out, fan_in, |_, _| rng.next_gaussian() * std);
        weights.push(w);
        biases.push(Matrix::zeros(n_out, 1));
        fan_in = n_out;
    }
    Ok(Model {
        weights,
        biases,
        hp: hp.clone(),
        n_input,
    })
}

impl Model {
    /// Assemble a model from explicit parameters, validating the shape chain.
    pub fn from_parts(
        hp: HyperParams,
        n_input: usize,
        weights: Vec<Matrix>,
        biases: Vec<Matrix>,
    ) -> Result<Self> {
        if weights.len() != hp.layers() || biases.len() != hp.layers() {
            return Err(Error::argument(format!(
                "expected {} weight/bias pairs, got {}/{}",
                hp.layers(),
                weights.len(),
                biases.len()
            )));
        }
        let mut fan_in = n_input;
        for (i, (w, b)) in weights.iter().zip(&biases).enumerate() {
            let n_out = hp.layer_sizes[i];
            if w.shape() != (n_out, fan_in) {
                return Err(Error::shape("model weights", w.shape(), (n_out, fan_in)));
            }
            if b.shape() != (n_out, 1) {
                return Err(Error::shape("model biases", b.shape(), (n_out, 1)));
            }
            fan_in = n_out;
        }
        Ok(Model {
            weights,
            biases,
            hp,
            n_input,
        })
    }

    pub fn hp(&self) -> &HyperParams {
        &self.hp
    }

    pub fn n_input(&self) -> usize {
        self.n_input
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Matrix] {
        &self.biases
    }

    pub(crate) fn weights_mut(&mut self) -> (&mut Vec<Matrix>, &mut Vec<Matrix>) {
        (&mut self.weights, &mut self.biases)
    }

    /// Sum of squared entries over all weights and biases; the norm that the
    /// regularization penalty is built from.
    pub fn params_norm_sq(&self) -> f64 {
        self.weights
            .iter()
            .map(Matrix::frobenius_sq)
            .chain(self.biases.iter().map(Matrix::frobenius_sq))
            .sum()
    }

    pub fn params_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite) && self.biases.iter().all(Matrix::is_finite)
    }
}

/// Forward propagation over a batch: `A_0 = x`, then
/// `Z_i = W_i A_{i-1} + b_i`, `A_i = sigma_i(Z_i)` for each layer.
pub fn forward(model: &Model, x_batch: &Matrix) -> Result<ForwardTrace> {
    if x_batch.rows() != model.n_input {
        return Err(Error::shape(
            "forward",
            x_batch.shape(),
            (model.n_input, x_batch.cols()),
        ));
    }
    let layers = model.hp.layers();
    let mut z = Vec::with_capacity(layers);
    let mut a = Vec::with_capacity(layers + 1);
    a.push(x_batch.clone());
    for i in 0..layers {
        let zi = model.weights[i]
            .gemm(&a[i])?
            .add_broadcast_col(&model.biases[i])?;
        a.push(activation(model.hp.activations[i], &zi));
        z.push(zi);
    }
    Ok(ForwardTrace { z, a })
}

/// Regularized cross-entropy cost over a batch:
/// the mean of `-[y ln a + (1-y) ln(1-a)]` with log arguments clamped at
/// [`LOG_CLAMP`], plus `alpha/(2 nb)` times the squared parameter norm.
pub fn cost(a_l: &Matrix, y: &Matrix, model: &Model, alpha: f64) -> Result<f64> {
    if a_l.rows() != 1 || y.rows() != 1 || a_l.cols() != y.cols() {
        return Err(Error::shape("cost", a_l.shape(), y.shape()));
    }
    let nb = a_l.cols() as f64;
    let mut total = 0.0;
    for j in 0..a_l.cols() {
        let a = a_l.get(0, j);
        let yv = y.get(0, j);
        total += yv * a.max(LOG_CLAMP).ln() + (1.0 - yv) * (1.0 - a).max(LOG_CLAMP).ln();
    }
    let mut j_val = -total / nb;
    if alpha != 0.0 {
        j_val += alpha / (2.0 * nb) * model.params_norm_sq();
    }
    Ok(j_val)
}

/// Backward propagation: starting from `dZ_L = A_L - Y`, produce
/// `dW_i = (1/nb) dZ_i A_{i-1}^T + (alpha/nb) W_i` and
/// `db_i = (1/nb) row_sums(dZ_i)`, chaining
/// `dZ_{i-1} = (W_i^T dZ_i) .* sigma'_{i-1}(Z_{i-1})` down the layers.
pub fn backward(model: &Model, trace: &ForwardTrace, y: &Matrix, alpha: f64) -> Result<GradientSet> {
    let layers = model.hp.layers();
    let a_l = trace.output();
    if y.rows() != 1 || y.cols() != a_l.cols() {
        return Err(Error::shape("backward", a_l.shape(), y.shape()));
    }
    let nb = a_l.cols() as f64;
    let inv_nb = 1.0 / nb;

    let mut dw = vec![Matrix::zeros(1, 1); layers];
    let mut db = vec![Matrix::zeros(1, 1); layers];

    let mut dz = a_l.sub(y)?;
    for i in (0..layers).rev() {
        let mut dwi = dz.gemm(&trace.a[i].transpose())?.scale(inv_nb);
        if alpha != 0.0 {
            dwi = dwi.add(&model.weights[i].scale(alpha * inv_nb))?;
        }
        dw[i] = dwi;
        db[i] = dz.row_sums().scale(inv_nb);
        if i > 0 {
            let upstream = model.weights[i].transpose().gemm(&dz)?;
            let sigma_prime = activation_derivative(model.hp.activations[i - 1], &trace.z[i - 1]);
            dz = upstream.hadamard(&sigma_prime)?;
        }
    }
    Ok(GradientSet { dw, db })
}

// ---------------------------------------------------------------------------
// Model text format
//
//   hearo-model v1
//   <L> <n_input>
//   <n1> ... <nL>
//   <code1> ... <codeL>
//   <lambda> <alpha> <batch_size> <epochs>
//   W <i>            (for i = 1..L, followed by n_i rows of n_{i-1} values)
//   b <i>            (followed by n_i rows of one value)
//
// Values are printed with Rust's shortest round-trip formatting, so every
// 64-bit parameter survives a save/load cycle bitwise.
// ---------------------------------------------------------------------------

const MODEL_MAGIC: &str = "hearo-model v1";

impl Model {
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{MODEL_MAGIC}")?;
        writeln!(w, "{} {}", self.hp.layers(), self.n_input)?;
        writeln!(
            w,
            "{}",
            self.hp
                .layer_sizes
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        )?;
        writeln!(
            w,
            "{}",
            self.hp
                .activations
                .iter()
                .map(|a| a.code().to_string())
                .collect::<Vec<_>>()
                .join(" ")
        )?;
        writeln!(
            w,
            "{} {} {} {}",
            self.hp.learning_rate, self.hp.reg_alpha, self.hp.batch_size, self.hp.epochs
        )?;
        for (i, (wm, bm)) in self.weights.iter().zip(&self.biases).enumerate() {
            writeln!(w, "W {}", i + 1)?;
            write_matrix_rows(w, wm)?;
            writeln!(w, "b {}", i + 1)?;
            write_matrix_rows(w, bm)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next_line = move || -> Result<(usize, String)> {
            match lines.next() {
                Some((n, line)) => Ok((n, line?)),
                None => Err(Error::parse(0, None, "unexpected end of model file")),
            }
        };

        let (n, magic) = next_line()?;
        if magic.trim() != MODEL_MAGIC {
            return Err(Error::parse(n, None, format!("expected {MODEL_MAGIC:?} header")));
        }
        let (n, dims) = next_line()?;
        let (layers, n_input) = {
            let parts: Vec<&str> = dims.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::parse(n, None, "expected \"<L> <n_input>\""));
            }
            let l: usize = parts[0]
                .parse()
                .map_err(|_| Error::parse(n, Some(1), "bad layer count"))?;
            let ni: usize = parts[1]
                .parse()
                .map_err(|_| Error::parse(n, Some(2), "bad input size"))?;
            (l, ni)
        };
        let (n, sizes_line) = next_line()?;
        let sizes = parse_usize_row(&sizes_line, layers, n, "layer sizes")?;
        let (n, acts_line) = next_line()?;
        let codes = parse_usize_row(&acts_line, layers, n, "activation codes")?;
        let mut acts = Vec::with_capacity(layers);
        for c in codes {
            acts.push(Activation::from_code(c as u32)?);
        }
        let (n, train_line) = next_line()?;
        let parts: Vec<&str> = train_line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::parse(n, None, "expected \"<lambda> <alpha> <nb> <epochs>\""));
        }
        let learning_rate: f64 = parts[0]
            .parse()
            .map_err(|_| Error::parse(n, Some(1), "bad learning rate"))?;
        let reg_alpha: f64 = parts[1]
            .parse()
            .map_err(|_| Error::parse(n, Some(2), "bad regularization strength"))?;
        let batch_size: usize = parts[2]
            .parse()
            .map_err(|_| Error::parse(n, Some(3), "bad batch size"))?;
        let epochs: usize = parts[3]
            .parse()
            .map_err(|_| Error::parse(n, Some(4), "bad epoch count"))?;
        let hp = HyperParams::new(sizes.clone(), acts, learning_rate, reg_alpha, batch_size, epochs)?;

        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        let mut fan_in = n_input;
        for i in 0..layers {
            let n_out = sizes[i];
            let (ln, marker) = next_line()?;
            if marker.trim() != format!("W {}", i + 1) {
                return Err(Error::parse(ln, None, format!("expected \"W {}\"", i + 1)));
            }
            weights.push(read_matrix_rows(&mut next_line, n_out, fan_in)?);
            let (ln, marker) = next_line()?;
            if marker.trim() != format!("b {}", i + 1) {
                return Err(Error::parse(ln, None, format!("expected \"b {}\"", i + 1)));
            }
            biases.push(read_matrix_rows(&mut next_line, n_out, 1)?);
            fan_in = n_out;
        }
        Model::from_parts(hp, n_input, weights, biases)
    }
}

fn write_matrix_rows<W: Write>(w: &mut W, m: &Matrix) -> Result<()> {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| m.get(i, j).to_string()).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

fn read_matrix_rows(
    next_line: &mut impl FnMut() -> Result<(usize, String)>,
    rows: usize,
    cols: usize,
) -> Result<Matrix> {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (n, line) = next_line()?;
        let values: Vec<&str> = line.split_whitespace().collect();
        if values.len() != cols {
            return Err(Error::parse(
                n,
                None,
                format!("expected {cols} values, found {}", values.len()),
            ));
        }
        for (c, v) in values.iter().enumerate() {
            data.push(
                v.parse::<f64>()
                    .map_err(|_| Error::parse(n, Some(c + 1), format!("bad numeral {v:?}")))?,
            );
        }
    }
    Matrix::from_vec(rows, cols, data)
}

fn parse_usize_row(line: &str, expected: usize, line_no: usize, what: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != expected {
        return Err(Error::parse(
            line_no,
            None,
            format!("expected {expected} {what}, found {}", parts.len()),
        ));
    }
    parts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.parse()
                .map_err(|_| Error::parse(line_no, Some(i + 1), format!("bad value {p:?}")))
        })
        .collect()
}
