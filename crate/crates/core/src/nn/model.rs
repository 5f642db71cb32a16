use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of the MLP output, the recurrent state and the convolution.
pub const HIDDEN: usize = 64;

/// Network operator placed between the point-wise MLP and the pooling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Row-by-row 2D recurrence, deepest row first.
    TreeRnn,
    /// No operator: pool the MLP features directly.
    MlpOnly,
    /// One 3x3 same-padded convolution with relu.
    Conv2d,
    /// A single scan over all pixels in row-major order.
    RowRnn,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::TreeRnn, Variant::MlpOnly, Variant::Conv2d, Variant::RowRnn];

    pub fn name(self) -> &'static str {
        match self {
            Variant::TreeRnn => "treernn",
            Variant::MlpOnly => "mlponly",
            Variant::Conv2d => "conv2d",
            Variant::RowRnn => "rowrnn",
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            Variant::TreeRnn => 0,
            Variant::MlpOnly => 1,
            Variant::Conv2d => 2,
            Variant::RowRnn => 3,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        Variant::ALL.into_iter().find(|v| v.code() == code)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "treernn" => Ok(Variant::TreeRnn),
            "mlponly" | "mlp" => Ok(Variant::MlpOnly),
            "conv2d" | "2dconv" | "conv" => Ok(Variant::Conv2d),
            "rowrnn" | "rnn" => Ok(Variant::RowRnn),
            "drnn" => Err(Error::InvalidArgument("the D-RNN baseline is not implemented".into())),
            other => Err(Error::InvalidArgument(format!("unknown variant {other:?}"))),
        }
    }
}

/// Positions the TreeRNN max-pool ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Width positions of the last row step's output.
    #[default]
    FinalRow,
    /// Every position of every row step's output.
    AllSteps,
}

impl Pooling {
    pub(crate) fn code(self) -> u32 {
        match self {
            Pooling::FinalRow => 0,
            Pooling::AllSteps => 1,
        }
    }
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "final_row" | "final" => Ok(Pooling::FinalRow),
            "all_steps" | "all" => Ok(Pooling::AllSteps),
            other => Err(Error::InvalidArgument(format!("unknown pooling {other:?}"))),
        }
    }
}

/// Parameter roles. Blocks are stored in this order when present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    MlpWeight,
    MlpBias,
    ConvKernel,
    ConvBias,
    CellInput,
    CellRecurrent,
    CellBias,
    HeadWeight,
    HeadBias,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::MlpWeight => "mlp.weight",
            Role::MlpBias => "mlp.bias",
            Role::ConvKernel => "conv.kernel",
            Role::ConvBias => "conv.bias",
            Role::CellInput => "cell.w_in",
            Role::CellRecurrent => "cell.w_h",
            Role::CellBias => "cell.bias",
            Role::HeadWeight => "head.weight",
            Role::HeadBias => "head.bias",
        }
    }

    pub fn is_bias(self) -> bool {
        matches!(self, Role::MlpBias | Role::ConvBias | Role::CellBias | Role::HeadBias)
    }
}

/// One parameter matrix (`rows x cols`, row-major) inside the flat vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamBlock {
    pub role: Role,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl ParamBlock {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Network parameters as one flat vector plus the block layout.
///
/// Weight matrices are stored `fan_in x fan_out`. The convolution kernel is
/// `(ky, kx, c_in) x c_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub(crate) variant: Variant,
    pub(crate) pooling: Pooling,
    pub(crate) input_channels: usize,
    pub(crate) classes: usize,
    pub(crate) seed: u64,
    pub(crate) params: Vec<f64>,
    pub(crate) blocks: Vec<ParamBlock>,
}

pub(crate) fn layout(variant: Variant, input_channels: usize, classes: usize) -> Vec<ParamBlock> {
    let mut shapes = vec![(Role::MlpWeight, input_channels, HIDDEN), (Role::MlpBias, 1, HIDDEN)];
    match variant {
        Variant::TreeRnn => {
            shapes.extend([(Role::CellInput, 2 * HIDDEN, HIDDEN), (Role::CellRecurrent, HIDDEN, HIDDEN), (Role::CellBias, 1, HIDDEN)])
        }
        Variant::RowRnn => {
            shapes.extend([(Role::CellInput, HIDDEN, HIDDEN), (Role::CellRecurrent, HIDDEN, HIDDEN), (Role::CellBias, 1, HIDDEN)])
        }
        Variant::Conv2d => shapes.extend([(Role::ConvKernel, 9 * HIDDEN, HIDDEN), (Role::ConvBias, 1, HIDDEN)]),
        Variant::MlpOnly => {}
    }
    shapes.extend([(Role::HeadWeight, HIDDEN, classes), (Role::HeadBias, 1, classes)]);
    let mut offset = 0;
    shapes
        .into_iter()
        .map(|(role, rows, cols)| {
            let b = ParamBlock { role, offset, rows, cols };
            offset += rows * cols;
            b
        })
        .collect()
}

/// Builds a model with Glorot-uniform weights (`±sqrt(6 / (fan_in + fan_out))`)
/// and zero biases, drawn from a generator seeded with `seed`.
pub fn build_model(variant: Variant, input_channels: usize, classes: usize, seed: u64) -> Result<Model> {
    if input_channels == 0 || classes < 2 {
        return Err(Error::InvalidArgument(format!("need at least one input channel and two classes, got {input_channels} and {classes}")));
    }
    let blocks = layout(variant, input_channels, classes);
    let total = blocks.last().map_or(0, |b| b.offset + b.len());
    let mut params = vec![0.0; total];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for b in &blocks {
        if b.role.is_bias() {
            continue;
        }
        let limit = (6.0 / (b.rows + b.cols) as f64).sqrt();
        for p in &mut params[b.range()] {
            *p = rng.gen_range(-limit..limit);
        }
    }
    Ok(Model { variant, pooling: Pooling::default(), input_channels, classes, seed, params, blocks })
}

impl Model {
    pub fn with_pooling(mut self, pooling: Pooling) -> Self {
        self.pooling = pooling;
        self
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn pooling(&self) -> Pooling {
        self.pooling
    }

    pub fn input_channels(&self) -> usize {
        self.input_channels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn blocks(&self) -> &[ParamBlock] {
        &self.blocks
    }

    pub fn block(&self, role: Role) -> Option<ParamBlock> {
        self.blocks.iter().copied().find(|b| b.role == role)
    }

    pub(crate) fn range(&self, role: Role) -> Range<usize> {
        self.block(role).unwrap_or_else(|| panic!("{} has no {} block", self.variant, role.name())).range()
    }

    pub fn get(&self, role: Role) -> &[f64] {
        &self.params[self.range(role)]
    }

    pub fn get_mut(&mut self, role: Role) -> &mut [f64] {
        let r = self.range(role);
        &mut self.params[r]
    }

    /// Fills every bias block with uniform values in `±scale`. Used to move
    /// gradient-check instances away from the relu kink at zero.
    pub fn randomize_biases(&mut self, seed: u64, scale: f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for b in self.blocks.clone() {
            if b.role.is_bias() {
                for p in &mut self.params[b.range()] {
                    *p = rng.gen_range(-scale..scale);
                }
            }
        }
    }
}

/// Gradient with respect to every model parameter, same layout as [`Model`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub(crate) values: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(m: &Model) -> Self {
        Gradients { values: vec![0.0; m.params.len()] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.values {
            *a *= factor;
        }
    }
}
