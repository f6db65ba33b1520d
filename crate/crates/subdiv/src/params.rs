//! Network parameters and the `NSUBDIV1` model container.
//!
//! Layout (all integers u32 little-endian, floats f64 little-endian):
//!
//! ```text
//! "NSUBDIV1"
//! feature_dim, levels, net_count (= 3)
//! per net (init, vertex, edge): layer_count, then layer_count + 1 widths
//! per net, per layer: weights (row-major, out × in), then bias
//! ```

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SubdivError};
use crate::mlp::Mlp;

pub const MAGIC: &[u8; 8] = b"NSUBDIV1";

/// Width of the geometric half-flap input (three local-frame vectors).
pub const GEO_DIM: usize = 9;

pub const DEFAULT_FEATURE_DIM: usize = 32;
pub const DEFAULT_HIDDEN: [usize; 2] = [32, 32];
pub const DEFAULT_LEVELS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct SubdivNetParams {
    /// Half-flap geometry → vertex feature.
    pub init_net: Mlp,
    /// Half-flap geometry + four stencil features → even displacement + feature.
    pub vertex_net: Mlp,
    /// Same inputs → odd displacement + feature.
    pub edge_net: Mlp,
    pub feature_dim: usize,
    pub levels: usize,
}

pub(crate) const NET_NAMES: [&str; 3] = ["init_net", "vertex_net", "edge_net"];

fn net_dims(feature_dim: usize, hidden: &[usize]) -> [Vec<usize>; 3] {
    let chain = |input: usize, output: usize| {
        let mut d = vec![input];
        d.extend_from_slice(hidden);
        d.push(output);
        d
    };
    let stencil = GEO_DIM + 4 * feature_dim;
    [
        chain(GEO_DIM, feature_dim),
        chain(stencil, 3 + feature_dim),
        chain(stencil, 3 + feature_dim),
    ]
}

impl SubdivNetParams {
    /// Xavier-initialized networks drawn from a ChaCha8 stream seeded with `seed`.
    pub fn new_random(feature_dim: usize, hidden: &[usize], levels: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [a, b, c] = net_dims(feature_dim, hidden);
        Self {
            init_net: Mlp::xavier(&a, &mut rng),
            vertex_net: Mlp::xavier(&b, &mut rng),
            edge_net: Mlp::xavier(&c, &mut rng),
            feature_dim,
            levels,
        }
    }

    pub fn zeros(feature_dim: usize, hidden: &[usize], levels: usize) -> Self {
        let [a, b, c] = net_dims(feature_dim, hidden);
        Self {
            init_net: Mlp::zeros(&a),
            vertex_net: Mlp::zeros(&b),
            edge_net: Mlp::zeros(&c),
            feature_dim,
            levels,
        }
    }

    /// Zero-valued container with the same shapes (used for gradients).
    pub fn zeros_like(&self) -> Self {
        Self {
            init_net: Mlp::zeros(&self.init_net.dims()),
            vertex_net: Mlp::zeros(&self.vertex_net.dims()),
            edge_net: Mlp::zeros(&self.edge_net.dims()),
            feature_dim: self.feature_dim,
            levels: self.levels,
        }
    }

    pub fn nets(&self) -> [&Mlp; 3] {
        [&self.init_net, &self.vertex_net, &self.edge_net]
    }

    pub fn nets_mut(&mut self) -> [&mut Mlp; 3] {
        [&mut self.init_net, &mut self.vertex_net, &mut self.edge_net]
    }

    pub fn param_count(&self) -> usize {
        self.nets().iter().map(|n| n.param_count()).sum()
    }

    /// All parameters in file order.
    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.init_net
            .params()
            .chain(self.vertex_net.params())
            .chain(self.edge_net.params())
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.init_net
            .params_mut()
            .chain(self.vertex_net.params_mut())
            .chain(self.edge_net.params_mut())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.params().copied().collect()
    }

    pub fn set_from_slice(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.param_count());
        for (p, v) in self.params_mut().zip(values) {
            *p = *v;
        }
    }

    /// Checks that network widths agree with `feature_dim`.
    pub fn check(&self) -> Result<()> {
        let d = self.feature_dim;
        let stencil = GEO_DIM + 4 * d;
        let expect = [(GEO_DIM, d), (stencil, 3 + d), (stencil, 3 + d)];
        for ((net, (i, o)), name) in self.nets().iter().zip(expect).zip(NET_NAMES) {
            if net.layers.is_empty() || net.input_dim() != i || net.output_dim() != o {
                return Err(SubdivError::DimensionMismatch(format!(
                    "{name} is {:?}, expected input {i} and output {o} for feature_dim {d}",
                    net.dims()
                )));
            }
            for w in net.layers.windows(2) {
                if w[0].outputs != w[1].inputs {
                    return Err(SubdivError::DimensionMismatch(format!(
                        "{name} layer widths do not chain: {:?}",
                        net.dims()
                    )));
                }
            }
            for l in &net.layers {
                if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                    return Err(SubdivError::DimensionMismatch(format!("{name} storage size")));
                }
            }
        }
        Ok(())
    }

    /// Scales every parameter (used on gradient containers).
    pub fn scale(&mut self, factor: f64) {
        for p in self.params_mut() {
            *p *= factor;
        }
    }

    /// `self += other`, element-wise in storage order.
    pub fn add_assign(&mut self, other: &SubdivNetParams) {
        for (a, b) in self.params_mut().zip(other.params()) {
            *a += *b;
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 8 * self.param_count());
        out.extend_from_slice(MAGIC);
        for v in [self.feature_dim, self.levels, 3] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for net in self.nets() {
            out.extend_from_slice(&(net.layers.len() as u32).to_le_bytes());
            for d in net.dims() {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
        }
        for p in self.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(SubdivError::ModelFormat("bad magic (expected NSUBDIV1)".into()));
        }
        let feature_dim = r.u32()? as usize;
        let levels = r.u32()? as usize;
        let nets = r.u32()?;
        if nets != 3 {
            return Err(SubdivError::ModelFormat(format!("expected 3 networks, found {nets}")));
        }
        let mut dims = Vec::with_capacity(3);
        for _ in 0..3 {
            let layers = r.u32()? as usize;
            if layers == 0 || layers > 64 {
                return Err(SubdivError::ModelFormat(format!("implausible layer count {layers}")));
            }
            let d: Vec<usize> = (0..=layers).map(|_| r.u32().map(|v| v as usize)).collect::<Result<_>>()?;
            dims.push(d);
        }
        let mut params = Self {
            init_net: Mlp::zeros(&dims[0]),
            vertex_net: Mlp::zeros(&dims[1]),
            edge_net: Mlp::zeros(&dims[2]),
            feature_dim,
            levels,
        };
        params.check().map_err(|e| SubdivError::ModelFormat(e.to_string()))?;
        let expected = 8 * params.param_count();
        if bytes.len() - r.pos != expected {
            return Err(SubdivError::ModelFormat(format!(
                "parameter block is {} bytes, expected {expected}",
                bytes.len() - r.pos
            )));
        }
        for p in params.params_mut() {
            let b = &bytes[r.pos..r.pos + 8];
            r.pos += 8;
            *p = f64::from_le_bytes(b.try_into().expect("8 bytes"));
        }
        Ok(params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|source| SubdivError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| SubdivError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(SubdivError::ModelFormat(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}
