use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty utterance")]
    EmptyUtterance,
    #[error("empty mask")]
    EmptyMask,
    #[error("stack underflow: need {needed}, have {available}")]
    StackUnderflow { needed: usize, available: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense row-major array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self, NeuralError> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(NeuralError::ShapeMismatch(format!("{shape:?} holds {n} values, got {}", data.len())));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(1)
    }

    /// Row length (1 for vectors).
    pub fn cols(&self) -> usize {
        self.shape.get(1).copied().unwrap_or(1)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// Named parameter tensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
    index: HashMap<String, usize>,
}

pub const INIT_SCALE: f64 = 0.08;

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_tensor(&mut self, name: &str, t: Tensor) -> ParamId {
        assert!(!self.index.contains_key(name), "duplicate parameter {name}");
        self.index.insert(name.to_string(), self.tensors.len());
        self.names.push(name.to_string());
        self.tensors.push(t);
        ParamId(self.tensors.len() - 1)
    }

    /// Adds a tensor drawn from uniform(-0.08, 0.08).
    pub fn add_uniform<R: Rng>(&mut self, name: &str, shape: &[usize], rng: &mut R) -> ParamId {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.gen_range(-INIT_SCALE..INIT_SCALE)).collect();
        self.add_tensor(name, Tensor::from_vec(shape, data).expect("sized"))
    }

    pub fn add_zeros(&mut self, name: &str, shape: &[usize]) -> ParamId {
        self.add_tensor(name, Tensor::zeros(shape))
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).map(|&i| ParamId(i))
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn zero_grads(&self) -> Gradients {
        Gradients {
            data: self.tensors.iter().map(|t| vec![0.0; t.len()]).collect(),
        }
    }

    /// `manifest.tsv` (name, shape) and `params.bin` (little-endian f64 in manifest order).
    pub fn save(&self, dir: &Path) -> Result<(), NeuralError> {
        let mut manifest = String::new();
        let mut bin = Vec::with_capacity(self.num_scalars() * 8);
        for (name, t) in self.names.iter().zip(&self.tensors) {
            let shape: Vec<String> = t.shape.iter().map(usize::to_string).collect();
            manifest.push_str(&format!("{name}\t{}\n", shape.join("x")));
            for x in &t.data {
                bin.extend_from_slice(&x.to_le_bytes());
            }
        }
        std::fs::write(dir.join("manifest.tsv"), manifest)?;
        std::fs::File::create(dir.join("params.bin"))?.write_all(&bin)?;
        Ok(())
    }

    /// Loads values into an identically shaped store.
    pub fn load_into(&mut self, dir: &Path) -> Result<(), NeuralError> {
        let manifest = std::fs::read_to_string(dir.join("manifest.tsv"))?;
        let mut bin = Vec::new();
        std::fs::File::open(dir.join("params.bin"))?.read_to_end(&mut bin)?;
        let mut offset = 0;
        let mut seen = 0;
        for (lineno, line) in manifest.lines().enumerate() {
            let bad = |m: &str| NeuralError::Checkpoint(format!("manifest.tsv line {}: {m}", lineno + 1));
            let (name, shape) = line.split_once('\t').ok_or_else(|| bad("expected name<TAB>shape"))?;
            let shape: Vec<usize> = shape
                .split('x')
                .map(|d| d.parse().map_err(|_| bad("bad dimension")))
                .collect::<Result<_, _>>()?;
            let id = self.id(name).ok_or_else(|| bad(&format!("unknown parameter {name}")))?;
            let t = &mut self.tensors[id.0];
            if t.shape != shape {
                return Err(NeuralError::ShapeMismatch(format!(
                    "{name}: checkpoint {shape:?}, config {:?}",
                    t.shape
                )));
            }
            let end = offset + t.len() * 8;
            let chunk = bin.get(offset..end).ok_or_else(|| bad("params.bin is truncated"))?;
            for (x, b) in t.data.iter_mut().zip(chunk.chunks_exact(8)) {
                *x = f64::from_le_bytes(b.try_into().expect("8 bytes"));
            }
            offset = end;
            seen += 1;
        }
        if seen != self.len() || offset != bin.len() {
            return Err(NeuralError::Checkpoint(format!(
                "checkpoint has {seen} parameters and {} bytes; expected {} parameters and {} bytes",
                bin.len(),
                self.len(),
                offset
            )));
        }
        Ok(())
    }
}

/// Per-parameter dense gradients aligned with a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub data: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn get(&self, id: ParamId) -> &[f64] {
        &self.data[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut [f64] {
        &mut self.data[id.0]
    }

    pub fn add_scaled(&mut self, other: &Gradients, k: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += k * y;
            }
        }
    }

    pub fn scale(&mut self, k: f64) {
        self.data.iter_mut().flatten().for_each(|x| *x *= k);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().flatten().all(|&x| x == 0.0)
    }

    pub fn zero(&mut self) {
        self.data.iter_mut().flatten().for_each(|x| *x = 0.0);
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }
}
