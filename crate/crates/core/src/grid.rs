//! Discrete parameter grids with optional multi-dimensional shape metadata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The discrete set of tuning parameters, with a canonical flat ordering.
///
/// Each entry of `values` is one parameter vector. When `shape` is present,
/// the flat ordering is row-major over the dimensions and the coordinates
/// along each axis must be strictly monotone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    values: Vec<Vec<f64>>,
    shape: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GridFile {
    dim: usize,
    shape: Option<Vec<usize>>,
    values: Vec<Vec<f64>>,
}

impl ParameterGrid {
    pub fn new(values: Vec<Vec<f64>>, shape: Option<Vec<usize>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("parameter grid must contain at least one point"));
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(Error::invalid("parameter vectors must have dimension >= 1"));
        }
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::invalid("all parameter vectors must share one dimension"));
        }
        if let Some(shape) = &shape {
            let prod: usize = shape.iter().product();
            if prod != values.len() {
                return Err(Error::invalid(format!(
                    "shape product {} does not match grid size {}",
                    prod,
                    values.len()
                )));
            }
            if shape.len() != dim {
                return Err(Error::invalid(
                    "shape rank must match the parameter dimension",
                ));
            }
            check_axis_monotone(&values, shape)?;
        }
        Ok(ParameterGrid { values, shape })
    }

    /// Evenly spaced 1-D grid over `[lo, hi]` inclusive.
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 1 {
            return Err(Error::invalid("grid must contain at least one point"));
        }
        let values = (0..count)
            .map(|j| {
                let t = if count == 1 {
                    0.0
                } else {
                    j as f64 / (count - 1) as f64
                };
                vec![lo + t * (hi - lo)]
            })
            .collect();
        ParameterGrid::new(values, None)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn shape(&self) -> Option<&[usize]> {
        self.shape.as_deref()
    }

    pub fn value(&self, flat_index: usize) -> &[f64] {
        &self.values[flat_index]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GridFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("grid json: {e}")))?;
        if file.values.first().map(|v| v.len()) != Some(file.dim) {
            return Err(Error::Parse(
                "grid json: declared dim does not match values".into(),
            ));
        }
        ParameterGrid::new(file.values, file.shape)
    }

    pub fn to_json(&self) -> String {
        let file = GridFile {
            dim: self.dim(),
            shape: self.shape.clone(),
            values: self.values.clone(),
        };
        serde_json::to_string_pretty(&file).expect("grid serialization cannot fail")
    }
}

fn check_axis_monotone(values: &[Vec<f64>], shape: &[usize]) -> Result<()> {
    // Strides of the row-major flat ordering.
    let mut strides = vec![1usize; shape.len()];
    for axis in (0..shape.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * shape[axis + 1];
    }
    for (axis, (&size, &stride)) in shape.iter().zip(&strides).enumerate() {
        if size < 2 {
            continue;
        }
        let ascending = values[stride][axis] > values[0][axis];
        for (flat, point) in values.iter().enumerate() {
            let coord = (flat / stride) % size;
            if coord + 1 == size {
                continue;
            }
            let next = values[flat + stride][axis];
            let ok = if ascending {
                next > point[axis]
            } else {
                next < point[axis]
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "grid coordinates along axis {axis} are not strictly monotone"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let g = ParameterGrid::linspace(0.0, 1.0, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.value(0), &[0.0]);
        assert_eq!(g.value(4), &[1.0]);
    }

    #[test]
    fn shape_product_must_match() {
        let vals = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(ParameterGrid::new(vals, Some(vec![2, 2])).is_err());
    }

    #[test]
    fn rejects_non_monotone_axis() {
        let vals = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 0.5],
            vec![0.0, 0.0],
        ];
        assert!(ParameterGrid::new(vals, Some(vec![2, 2])).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = ParameterGrid::new(
            vec![vec![0.0, 0.5], vec![0.0, 1.0], vec![1.0, 0.5], vec![1.0, 1.0]],
            Some(vec![2, 2]),
        )
        .unwrap();
        let back = ParameterGrid::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }
}
