//! From-scratch differentiable classifier over graph images.
//!
//! Every variant starts with a point-wise single-layer perceptron (relu,
//! [`HIDDEN`] outputs) and ends with a max-pool and a linear softmax head;
//! [`Variant`] picks the operator in between. All math is `f64`.

mod adam;
mod checkpoint;
mod gradcheck;
mod linalg;
mod model;
mod network;

pub use adam::{adam_step, Adam, AdamConfig};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use gradcheck::{grad_check, BlockCheck, GradCheckReport};
pub use model::{build_model, Gradients, Model, ParamBlock, Pooling, Role, Variant, HIDDEN};
pub use network::{backward, backward_acc, cross_entropy, forward, loss, loss_and_backward, predict, Forward};

use crate::error::{Error, Result};
use crate::projection::GraphImage;

/// Dense `H x W x C` network input, row-major `[row][col][channel]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::Shape(format!("{} values for a {height}x{width}x{channels} feature map", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature map"));
        }
        Ok(FeatureMap { height, width, channels, data })
    }

    pub fn from_image(img: &GraphImage) -> Result<Self> {
        Self::new(img.height(), img.width(), img.channels(), img.pixels().iter().map(|&p| f64::from(p)).collect())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn at(&self, row: usize, col: usize) -> &[f64] {
        let i = (row * self.width + col) * self.channels;
        &self.data[i..i + self.channels]
    }
}
