//! On-disk formats.
//!
//! * Text grid: `W H` header, then `H` rows of `W` tokens (`0` White, `1` Black).
//! * Plain PGM (`P2`) with maxval 255.
//! * MNIST IDX, big-endian, image magic 2051 and label magic 2049.
//! * Patch store: versioned text records `x y w0 … w17 converged`.
//! * Flat `key = value` files for configs and run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::autoencoder::{BinaryImage, NeighborGraph, Pixel, RestorationStats, WeightSet};
use crate::convfilter::{PatchWeightStore, PatchWeights, FILTER_SIZE, PATCH_EDGES};
use crate::dimred::{FeaturePoint, GrayImage};
use crate::{Error, Result};

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;
pub const STORE_HEADER: &str = "convqae-patch-store";
pub const STORE_VERSION: u32 = 1;
pub const WEIGHTS_HEADER: &str = "convqae-weights";

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with their 1-based line numbers.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} {token:?}")))
}

pub fn parse_grid(path: &Path, text: &str) -> Result<BinaryImage> {
    let mut lines = numbered_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing `W H` header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::parse(path, hl, "header must be `W H`"));
    }
    let width: usize = parse_num(path, hl, dims[0], "width")?;
    let height: usize = parse_num(path, hl, dims[1], "height")?;
    if width == 0 || height == 0 {
        return Err(Error::parse(path, hl, "width and height must be positive"));
    }
    let mut pixels = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (ln, line) in lines {
        if rows == height {
            return Err(Error::parse(path, ln, "more rows than the header declares"));
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != width {
            return Err(Error::parse(
                path,
                ln,
                format!("expected {width} tokens, found {}", tokens.len()),
            ));
        }
        for t in tokens {
            pixels.push(match t {
                "0" => Pixel::White,
                "1" => Pixel::Black,
                other => {
                    return Err(Error::parse(
                        path,
                        ln,
                        format!("invalid pixel token {other:?}"),
                    ))
                }
            });
        }
        rows += 1;
    }
    if rows != height {
        return Err(Error::parse(
            path,
            text.lines().count().max(1),
            format!("expected {height} rows, found {rows}"),
        ));
    }
    BinaryImage::new(width, height, pixels)
}

pub fn format_grid(image: &BinaryImage) -> String {
    let mut out = format!("{} {}\n", image.width(), image.height());
    for row in image.pixels().chunks(image.width()) {
        let tokens: Vec<&str> = row
            .iter()
            .map(|p| if *p == Pixel::White { "0" } else { "1" })
            .collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_grid(path: &Path) -> Result<BinaryImage> {
    parse_grid(path, &read_text(path)?)
}

pub fn write_grid(path: &Path, image: &BinaryImage) -> Result<()> {
    write_text(path, &format_grid(image))
}

pub fn parse_pgm(path: &Path, text: &str) -> Result<GrayImage> {
    // Tokens with their line numbers, `#` comments stripped.
    let mut tokens = text.lines().enumerate().flat_map(|(i, line)| {
        let content = line.split('#').next().unwrap_or("");
        content.split_whitespace().map(move |t| (i + 1, t))
    });
    let mut next = |what: &str| {
        tokens.next().ok_or_else(|| {
            Error::parse(path, text.lines().count().max(1), format!("missing {what}"))
        })
    };
    let (ml, magic) = next("magic")?;
    if magic != "P2" {
        return Err(Error::parse(
            path,
            ml,
            format!("unsupported PGM magic {magic:?}; only P2 is read"),
        ));
    }
    let (wl, w) = next("width")?;
    let width: usize = parse_num(path, wl, w, "width")?;
    let (hl, h) = next("height")?;
    let height: usize = parse_num(path, hl, h, "height")?;
    let (vl, v) = next("maxval")?;
    let maxval: u32 = parse_num(path, vl, v, "maxval")?;
    if maxval != 255 {
        return Err(Error::parse(
            path,
            vl,
            format!("maxval must be 255, got {maxval}"),
        ));
    }
    let mut data = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        let (line, t) = next("pixel value")?;
        let value: u32 = parse_num(path, line, t, "pixel value")?;
        if value > 255 {
            return Err(Error::parse(
                path,
                line,
                format!("pixel value {value} exceeds maxval"),
            ));
        }
        data.push(f64::from(value) / 255.0);
    }
    if let Some((line, _)) = tokens.next() {
        return Err(Error::parse(path, line, "trailing data after pixel values"));
    }
    GrayImage::new(width, height, data)
}

pub fn format_pgm(image: &GrayImage) -> String {
    let mut out = format!("P2\n{} {}\n255\n", image.width(), image.height());
    for row in image.data().chunks(image.width()) {
        let tokens: Vec<String> = row
            .iter()
            .map(|v| ((v * 255.0).round() as u8).to_string())
            .collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    parse_pgm(path, &read_text(path)?)
}

pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<()> {
    write_text(path, &format_pgm(image))
}

fn be_u32(path: &Path, bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::parse(path, 0, format!("truncated header at byte {offset}")))
}

/// Decode an IDX image/label file pair, returning `count` samples starting
/// at `offset`.
pub fn parse_mnist_idx(
    images_path: &Path,
    images: &[u8],
    labels_path: &Path,
    labels: &[u8],
    count: usize,
    offset: usize,
) -> Result<Vec<(GrayImage, u8)>> {
    let magic = be_u32(images_path, images, 0)?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::parse(
            images_path,
            0,
            format!("bad image magic {magic}"),
        ));
    }
    let n_images = be_u32(images_path, images, 4)? as usize;
    let rows = be_u32(images_path, images, 8)? as usize;
    let cols = be_u32(images_path, images, 12)? as usize;
    let magic = be_u32(labels_path, labels, 0)?;
    if magic != IDX_LABEL_MAGIC {
        return Err(Error::parse(
            labels_path,
            0,
            format!("bad label magic {magic}"),
        ));
    }
    let n_labels = be_u32(labels_path, labels, 4)? as usize;
    if n_images != n_labels {
        return Err(Error::parse(
            labels_path,
            0,
            format!("{n_images} images but {n_labels} labels"),
        ));
    }
    if offset + count > n_images {
        return Err(Error::parse(
            images_path,
            0,
            format!(
                "requested samples {offset}..{} of {n_images}",
                offset + count
            ),
        ));
    }
    let size = rows * cols;
    if images.len() < 16 + n_images * size {
        return Err(Error::parse(images_path, 0, "truncated image payload"));
    }
    if labels.len() < 8 + n_labels {
        return Err(Error::parse(labels_path, 0, "truncated label payload"));
    }
    (offset..offset + count)
        .map(|k| {
            let start = 16 + k * size;
            let data = images[start..start + size]
                .iter()
                .map(|&b| f64::from(b) / 255.0)
                .collect();
            let label = labels[8 + k];
            if label > 9 {
                return Err(Error::parse(
                    labels_path,
                    0,
                    format!("label {label} outside 0..=9"),
                ));
            }
            Ok((GrayImage::new(cols, rows, data)?, label))
        })
        .collect()
}

pub fn read_mnist_idx(
    images_path: &Path,
    labels_path: &Path,
    count: usize,
    offset: usize,
) -> Result<Vec<(GrayImage, u8)>> {
    let images = fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let labels = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    parse_mnist_idx(images_path, &images, labels_path, &labels, count, offset)
}

/// Encode samples as an IDX pair `(images, labels)`. Intensities are
/// rounded to bytes.
pub fn encode_mnist_idx(samples: &[(GrayImage, u8)]) -> Result<(Vec<u8>, Vec<u8>)> {
    let (rows, cols) = samples
        .first()
        .map_or((0, 0), |(im, _)| (im.height(), im.width()));
    let mut images = Vec::new();
    let mut labels = Vec::new();
    images.extend_from_slice(&IDX_IMAGE_MAGIC.to_be_bytes());
    images.extend_from_slice(&(samples.len() as u32).to_be_bytes());
    images.extend_from_slice(&(rows as u32).to_be_bytes());
    images.extend_from_slice(&(cols as u32).to_be_bytes());
    labels.extend_from_slice(&IDX_LABEL_MAGIC.to_be_bytes());
    labels.extend_from_slice(&(samples.len() as u32).to_be_bytes());
    for (im, label) in samples {
        if (im.height(), im.width()) != (rows, cols) {
            return Err(Error::Dimension("IDX samples must share one size".into()));
        }
        images.extend(im.data().iter().map(|v| (v * 255.0).round() as u8));
        labels.push(*label);
    }
    Ok((images, labels))
}

pub fn format_store(store: &PatchWeightStore) -> String {
    let mut out = format!(
        "{STORE_HEADER} {STORE_VERSION} {} {}\n",
        store.width(),
        store.height()
    );
    for y in 0..store.height() {
        for x in 0..store.width() {
            let entry = store.get(x, y);
            let _ = write!(out, "{x} {y}");
            for w in entry.weights.values() {
                let _ = write!(out, " {w}");
            }
            let _ = writeln!(out, " {}", u8::from(entry.converged));
        }
    }
    out
}

pub fn parse_store(path: &Path, text: &str) -> Result<PatchWeightStore> {
    let mut lines = numbered_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing store header"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 4 || head[0] != STORE_HEADER {
        return Err(Error::parse(
            path,
            hl,
            format!("expected `{STORE_HEADER} <version> W H`"),
        ));
    }
    let version: u32 = parse_num(path, hl, head[1], "version")?;
    if version != STORE_VERSION {
        return Err(Error::parse(
            path,
            hl,
            format!("unsupported store version {version}"),
        ));
    }
    let width: usize = parse_num(path, hl, head[2], "width")?;
    let height: usize = parse_num(path, hl, head[3], "height")?;
    let graph = NeighborGraph::torus(FILTER_SIZE, FILTER_SIZE)?;
    let mut slots: Vec<Option<PatchWeights>> = vec![None; width * height];
    for (ln, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != PATCH_EDGES + 3 {
            return Err(Error::parse(
                path,
                ln,
                format!(
                    "expected {} fields, found {}",
                    PATCH_EDGES + 3,
                    tokens.len()
                ),
            ));
        }
        let x: usize = parse_num(path, ln, tokens[0], "x")?;
        let y: usize = parse_num(path, ln, tokens[1], "y")?;
        if x >= width || y >= height {
            return Err(Error::parse(
                path,
                ln,
                format!("centre ({x}, {y}) outside {width}x{height}"),
            ));
        }
        let values = tokens[2..2 + PATCH_EDGES]
            .iter()
            .map(|t| parse_num::<f64>(path, ln, t, "weight"))
            .collect::<Result<Vec<_>>>()?;
        let converged = match tokens[2 + PATCH_EDGES] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(
                    path,
                    ln,
                    format!("invalid convergence flag {other:?}"),
                ))
            }
        };
        let weights = WeightSet::new(graph.clone(), values)
            .map_err(|e| Error::parse(path, ln, e.to_string()))?;
        let slot = &mut slots[y * width + x];
        if slot.is_some() {
            return Err(Error::parse(
                path,
                ln,
                format!("duplicate centre ({x}, {y})"),
            ));
        }
        *slot = Some(PatchWeights { weights, converged });
    }
    let entries = slots
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            s.ok_or_else(|| {
                Error::parse(
                    path,
                    0,
                    format!("missing centre ({}, {})", k % width, k / width),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PatchWeightStore::new(width, height, entries)
}

pub fn read_store(path: &Path) -> Result<PatchWeightStore> {
    parse_store(path, &read_text(path)?)
}

pub fn write_store(path: &Path, store: &PatchWeightStore) -> Result<()> {
    write_text(path, &format_store(store))
}

/// Whole-image weights: `convqae-weights W H converged`, then `i j w` per edge.
pub fn format_weights(weights: &WeightSet, converged: bool) -> String {
    let g = weights.graph();
    let mut out = format!(
        "{WEIGHTS_HEADER} {} {} {}\n",
        g.width(),
        g.height(),
        u8::from(converged)
    );
    for ((i, j), w) in weights.iter() {
        let _ = writeln!(out, "{i} {j} {w}");
    }
    out
}

pub fn parse_weights(path: &Path, text: &str) -> Result<(WeightSet, bool)> {
    let mut lines = numbered_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing weights header"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 4 || head[0] != WEIGHTS_HEADER {
        return Err(Error::parse(
            path,
            hl,
            format!("expected `{WEIGHTS_HEADER} W H converged`"),
        ));
    }
    let width: usize = parse_num(path, hl, head[1], "width")?;
    let height: usize = parse_num(path, hl, head[2], "height")?;
    let converged = head[3] == "1";
    let graph =
        NeighborGraph::torus(width, height).map_err(|e| Error::parse(path, hl, e.to_string()))?;
    let mut values = vec![None; graph.edges().len()];
    for (ln, line) in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(Error::parse(path, ln, "expected `i j w`"));
        }
        let i: usize = parse_num(path, ln, t[0], "vertex")?;
        let j: usize = parse_num(path, ln, t[1], "vertex")?;
        let w: f64 = parse_num(path, ln, t[2], "weight")?;
        let k = graph
            .edge_index(i, j)
            .ok_or_else(|| Error::parse(path, ln, format!("({i}, {j}) is not a torus edge")))?;
        values[k] = Some(w);
    }
    let values = values
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::parse(path, 0, "missing edge weights"))?;
    Ok((WeightSet::new(graph, values)?, converged))
}

pub fn read_weights(path: &Path) -> Result<(WeightSet, bool)> {
    parse_weights(path, &read_text(path)?)
}

pub fn write_weights(path: &Path, weights: &WeightSet, converged: bool) -> Result<()> {
    write_text(path, &format_weights(weights, converged))
}

/// `trial,wrong_pixels,complete`
pub fn format_stats_csv(stats: &RestorationStats) -> String {
    let mut out = String::from("trial,wrong_pixels,complete\n");
    for (t, w) in stats.wrong_pixels.iter().enumerate() {
        let _ = writeln!(out, "{t},{w},{}", u8::from(*w == 0));
    }
    out
}

/// `label,f_right,f_down`; unlabeled rows leave the label empty.
pub fn format_features_csv(points: &[FeaturePoint]) -> String {
    let mut out = String::from("label,f_right,f_down\n");
    for p in points {
        let label = p.label.map(|l| l.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{label},{},{}", p.f_right, p.f_down);
    }
    out
}

/// Parse a flat `key = value` file. `#` starts a comment.
pub fn parse_key_values(path: &Path, text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, i + 1, "expected `key = value`"))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn format_key_values(map: &BTreeMap<String, String>) -> String {
    map.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_key_values(path, &read_text(path)?)
}

pub fn write_key_values(path: &Path, map: &BTreeMap<String, String>) -> Result<()> {
    write_text(path, &format_key_values(map))
}
