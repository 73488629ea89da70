//! Browser bindings: add noise to a drawn image, denoise it with a learned
//! 3×3 autoencoder or the sliding 3×3 filter, and compute the 2-D coupling
//! features.
//!
//! Images cross the boundary as row-major byte arrays, `0` for White and
//! `1` for Black.

use wasm_bindgen::prelude::*;

use convqae::autoencoder::{self, BinaryImage, Pixel, SolveConfig, TrainConfig};
use convqae::{convfilter, dimred};

fn image(pixels: &[u8], width: usize, height: usize) -> Result<BinaryImage, JsError> {
    let pixels = pixels
        .iter()
        .map(|&b| match b {
            0 => Ok(Pixel::White),
            1 => Ok(Pixel::Black),
            other => Err(JsError::new(&format!("pixel value {other} is not 0 or 1"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BinaryImage::new(width, height, pixels)?)
}

fn bytes(image: &BinaryImage) -> Vec<u8> {
    image
        .pixels()
        .iter()
        .map(|&p| u8::from(p == Pixel::Black))
        .collect()
}

fn train_config(seed: u32) -> TrainConfig {
    TrainConfig {
        seed: u64::from(seed),
        ..TrainConfig::default()
    }
}

fn solve_config(seed: u32) -> SolveConfig {
    SolveConfig::default().with_seed(u64::from(seed).wrapping_add(1 << 32))
}

/// Flip `round(rate · width · height)` distinct pixels.
#[wasm_bindgen]
pub fn add_noise(
    pixels: &[u8],
    width: usize,
    height: usize,
    rate: f64,
    seed: u32,
) -> Result<Vec<u8>, JsError> {
    let img = image(pixels, width, height)?;
    Ok(bytes(&autoencoder::inject_noise(
        &img,
        rate,
        u64::from(seed),
    )?))
}

/// Learn whole-image couplings on `clean` (at least 3×3) and denoise `noisy`.
#[wasm_bindgen]
pub fn denoise_whole(
    clean: &[u8],
    noisy: &[u8],
    width: usize,
    height: usize,
    seed: u32,
) -> Result<Vec<u8>, JsError> {
    let clean = image(clean, width, height)?;
    let noisy = image(noisy, width, height)?;
    let trained = autoencoder::train_weights(&clean, &train_config(seed))?;
    Ok(bytes(&autoencoder::denoise(
        &noisy,
        &trained.weights,
        &solve_config(seed),
    )?))
}

/// Learn one 3×3 filter per pixel of `clean` and denoise `noisy` with them.
#[wasm_bindgen]
pub fn denoise_conv(
    clean: &[u8],
    noisy: &[u8],
    width: usize,
    height: usize,
    seed: u32,
) -> Result<Vec<u8>, JsError> {
    let clean = image(clean, width, height)?;
    let noisy = image(noisy, width, height)?;
    let store = convfilter::train_patch_weights(&clean, &train_config(seed))?;
    Ok(bytes(&convfilter::conv_denoise(
        &noisy,
        &store,
        &solve_config(seed),
    )?))
}

/// `[f_right, f_down]`: sums of right- and down-neighbour couplings.
#[wasm_bindgen]
pub fn features(pixels: &[u8], width: usize, height: usize) -> Result<Vec<f64>, JsError> {
    let p = dimred::reduce_to_2d(&image(pixels, width, height)?)?;
    Ok(p.coords().to_vec())
}
