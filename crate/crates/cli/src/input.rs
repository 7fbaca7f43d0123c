//! Matrix files: `{"re": [[...]], "im": [[...]]}`, with `im` optional.

use std::path::Path;

use bergman::{c, Mat2, Mat4, C64};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
struct RawMatrix {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

fn entries(raw: &RawMatrix, dim: usize) -> Result<Vec<(f64, f64)>, String> {
    let check = |rows: &Vec<Vec<f64>>, part: &str| {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(format!("`{part}` must be a {dim}×{dim} array"));
        }
        Ok(())
    };
    check(&raw.re, "re")?;
    if let Some(im) = &raw.im {
        check(im, "im")?;
    }
    Ok((0..dim * dim)
        .map(|k| {
            let (i, j) = (k / dim, k % dim);
            (raw.re[i][j], raw.im.as_ref().map_or(0.0, |m| m[i][j]))
        })
        .collect())
}

fn parse(text: &str, dim: usize) -> Result<Vec<C64>, String> {
    let raw: RawMatrix = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Ok(entries(&raw, dim)?.into_iter().map(|(re, im)| c(re, im)).collect())
}

fn read(path: &Path, dim: usize) -> Result<Vec<C64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    parse(&text, dim).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
}

pub fn read_mat4(path: &Path) -> Result<Mat4, CliError> {
    Ok(Mat4::from_row_slice(&read(path, 4)?))
}

pub fn read_mat2(path: &Path) -> Result<Mat2, CliError> {
    Ok(Mat2::from_row_slice(&read(path, 2)?))
}
