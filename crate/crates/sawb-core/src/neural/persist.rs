//! Binary model persistence.
//!
//! Layout: magic `SAWB`, format version, spec fields, training metadata,
//! scaling constants, then per-layer row-major little-endian f64 weight
//! matrices and bias vectors. Round-trips are byte-exact.

use super::{Layer, NetworkSpec, NetworkWeights, Scaling, Target, TrainingMeta};
use crate::spectral::DofMask;
use crate::{Error, Result};
use std::path::Path;

pub(crate) const MAGIC: &[u8; 4] = b"SAWB";
pub(crate) const FORMAT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64_slice(&mut self, vs: &[f64]) {
        self.u64(vs.len() as u64);
        for &v in vs {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    origin: String,
}

impl<'a> Reader<'a> {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::Format {
            path: self.origin.clone(),
            reason: reason.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(self.fail("unexpected end of file"));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64_vec(&mut self) -> Result<Vec<f64>> {
        let n = self.u64()? as usize;
        if n > 1 << 24 {
            return Err(self.fail(format!("implausible vector length {n}")));
        }
        (0..n).map(|_| self.f64()).collect()
    }
}

fn write_layer(w: &mut Writer, layer: &Layer) {
    w.u32(layer.rows as u32);
    w.u32(layer.cols as u32);
    for &v in &layer.w {
        w.f64(v);
    }
    for &v in &layer.b {
        w.f64(v);
    }
}

fn read_layer(r: &mut Reader) -> Result<Layer> {
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    if rows == 0 || cols == 0 || rows * cols > 1 << 24 {
        return Err(r.fail(format!("implausible layer shape {rows}x{cols}")));
    }
    let w = (0..rows * cols).map(|_| r.f64()).collect::<Result<_>>()?;
    let b = (0..rows).map(|_| r.f64()).collect::<Result<_>>()?;
    Ok(Layer { rows, cols, w, b })
}

pub(crate) fn to_bytes(net: &NetworkWeights) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);

    let spec = net.spec();
    w.u8(spec.mask.bits());
    w.u8(spec.target.tag());
    w.u32(spec.k as u32);
    w.u32(spec.branch_width as u32);
    w.u32(spec.trunk.len() as u32);
    for &t in &spec.trunk {
        w.u32(t as u32);
    }
    w.u32(spec.batch_size as u32);
    w.u32(spec.epochs as u32);
    w.f64(spec.learning_rate);

    let meta = net.meta();
    w.u64(meta.seed);
    w.u32(meta.epochs_run as u32);
    w.f64(meta.final_train_mse);

    let scaling = net.scaling();
    w.f64_slice(&scaling.feature_mean);
    w.f64_slice(&scaling.feature_std);
    w.f64(scaling.target_mean);
    w.f64(scaling.target_std);

    w.u32((net.branches().len() + net.trunk().len()) as u32);
    for layer in net.branches().iter().chain(net.trunk()) {
        write_layer(&mut w, layer);
    }
    w.0
}

pub(crate) fn from_bytes(bytes: &[u8], origin: &str) -> Result<NetworkWeights> {
    let mut r = Reader {
        bytes,
        pos: 0,
        origin: origin.to_string(),
    };
    if r.take(4)? != MAGIC {
        return Err(r.fail("bad magic bytes, not a model file"));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(r.fail(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }

    let mask = DofMask::from_bits(r.u8()?)?;
    let target = Target::from_tag(r.u8()?)?;
    let k = r.u32()? as usize;
    let branch_width = r.u32()? as usize;
    let trunk_len = r.u32()? as usize;
    if trunk_len > 64 {
        return Err(r.fail(format!("implausible trunk depth {trunk_len}")));
    }
    let trunk_dims = (0..trunk_len)
        .map(|_| r.u32().map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let batch_size = r.u32()? as usize;
    let epochs = r.u32()? as usize;
    let learning_rate = r.f64()?;
    let spec = NetworkSpec {
        mask,
        target,
        k,
        branch_width,
        trunk: trunk_dims,
        batch_size,
        epochs,
        learning_rate,
    };
    spec.validate()?;

    let meta = TrainingMeta {
        seed: r.u64()?,
        epochs_run: r.u32()? as usize,
        final_train_mse: r.f64()?,
    };

    let feature_mean = r.f64_vec()?;
    let feature_std = r.f64_vec()?;
    let target_mean = r.f64()?;
    let target_std = r.f64()?;
    if feature_mean.len() != spec.feature_width() || feature_std.len() != spec.feature_width() {
        return Err(r.fail("scaling width does not match network spec"));
    }
    let scaling = Scaling {
        feature_mean,
        feature_std,
        target_mean,
        target_std,
    };

    let layer_count = r.u32()? as usize;
    if layer_count != mask.count() + spec.trunk.len() + 1 {
        return Err(r.fail(format!("layer count {layer_count} does not match spec")));
    }
    let mut layers = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        layers.push(read_layer(&mut r)?);
    }
    if r.pos != bytes.len() {
        return Err(r.fail("trailing bytes after model payload"));
    }
    let trunk = layers.split_off(mask.count());

    let expected_shapes: Vec<(usize, usize)> = {
        let mut shapes = vec![(spec.branch_width, spec.branch_input_width()); mask.count()];
        let mut input = spec.trunk_input_width();
        for &w in &spec.trunk {
            shapes.push((w, input));
            input = w;
        }
        shapes.push((1, input));
        shapes
    };
    for (layer, &(rows, cols)) in layers.iter().chain(&trunk).zip(&expected_shapes) {
        if layer.rows != rows || layer.cols != cols {
            return Err(r.fail(format!(
                "layer shape {}x{} does not match spec {rows}x{cols}",
                layer.rows, layer.cols
            )));
        }
    }

    let mut net = super::init_network(&spec, meta.seed)?;
    *net.branches_mut() = layers;
    *net.trunk_mut() = trunk;
    net.set_scaling(scaling);
    net.set_meta(meta);
    Ok(net)
}

pub(crate) fn save(net: &NetworkWeights, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(net)).map_err(|e| Error::io(path.display().to_string(), e))
}

pub(crate) fn load(path: &Path) -> Result<NetworkWeights> {
    let bytes =
        std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    from_bytes(&bytes, &path.display().to_string())
}
