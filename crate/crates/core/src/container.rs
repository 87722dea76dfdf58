//! Flat binary container: little-endian arrays concatenated in `<base>.bin`,
//! with names, dtypes, shapes and free-form metadata in `<base>.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ArrayData {
    U8(Vec<u8>),
    U32(Vec<u32>),
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl ArrayData {
    fn dtype(&self) -> &'static str {
        match self {
            ArrayData::U8(_) => "u8",
            ArrayData::U32(_) => "u32",
            ArrayData::F32(_) => "f32",
            ArrayData::F64(_) => "f64",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ArrayData::U8(v) => v.len(),
            ArrayData::U32(v) => v.len(),
            ArrayData::F32(v) => v.len(),
            ArrayData::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn to_bytes(&self, out: &mut Vec<u8>) {
        match self {
            ArrayData::U8(v) => out.extend_from_slice(v),
            ArrayData::U32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            ArrayData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            ArrayData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
    }

    fn from_bytes(dtype: &str, bytes: &[u8]) -> Option<Self> {
        fn chunks<const N: usize, T>(bytes: &[u8], f: fn([u8; N]) -> T) -> Option<Vec<T>> {
            (bytes.len() % N == 0).then(|| bytes.chunks_exact(N).map(|c| f(c.try_into().unwrap())).collect())
        }
        Some(match dtype {
            "u8" => ArrayData::U8(bytes.to_vec()),
            "u32" => ArrayData::U32(chunks(bytes, u32::from_le_bytes)?),
            "f32" => ArrayData::F32(chunks(bytes, f32::from_le_bytes)?),
            "f64" => ArrayData::F64(chunks(bytes, f64::from_le_bytes)?),
            _ => return None,
        })
    }

    fn width(dtype: &str) -> usize {
        match dtype {
            "u32" | "f32" => 4,
            "f64" => 8,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Array {
    pub shape: Vec<usize>,
    pub data: ArrayData,
}

impl Array {
    pub fn new(shape: Vec<usize>, data: ArrayData) -> Result<Self> {
        if shape.iter().product::<usize>() != data.len() {
            return Err(Error::Domain(format!("shape {shape:?} does not hold {} values", data.len())));
        }
        Ok(Array { shape, data })
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    name: String,
    dtype: String,
    shape: Vec<usize>,
    /// Byte offset into the `.bin` file.
    offset: usize,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format: String,
    arrays: Vec<Entry>,
    meta: serde_json::Value,
}

const FORMAT: &str = "mosaic-container-1";

fn paths(base: &Path) -> (PathBuf, PathBuf) {
    (base.with_extension("bin"), base.with_extension("json"))
}

/// A named set of arrays plus metadata.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Container {
    pub meta: serde_json::Value,
    pub arrays: BTreeMap<String, Array>,
}

impl Container {
    pub fn new(meta: serde_json::Value) -> Self {
        Container { meta, arrays: BTreeMap::new() }
    }

    pub fn insert(&mut self, name: &str, array: Array) {
        self.arrays.insert(name.to_string(), array);
    }

    pub fn get(&self, name: &str) -> Result<&Array> {
        self.arrays.get(name).ok_or_else(|| Error::Domain(format!("container has no array `{name}`")))
    }

    /// Writes `base.bin` and `base.json` (any extension of `base` is replaced).
    pub fn write(&self, base: &Path) -> Result<()> {
        let (bin, json) = paths(base);
        let mut bytes = Vec::new();
        let mut entries = Vec::new();
        for (name, array) in &self.arrays {
            entries.push(Entry {
                name: name.clone(),
                dtype: array.data.dtype().into(),
                shape: array.shape.clone(),
                offset: bytes.len(),
            });
            array.data.to_bytes(&mut bytes);
        }
        let sidecar = Sidecar { format: FORMAT.into(), arrays: entries, meta: self.meta.clone() };
        fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;
        let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        fs::write(&json, text).map_err(|e| Error::io(&json, e))
    }

    pub fn read(base: &Path) -> Result<Self> {
        let (bin, json) = paths(base);
        let text = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
        let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| Error::format(&json, e.to_string()))?;
        if sidecar.format != FORMAT {
            return Err(Error::format(&json, format!("unknown container format `{}`", sidecar.format)));
        }
        let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
        let mut arrays = BTreeMap::new();
        for e in sidecar.arrays {
            let len = e.shape.iter().product::<usize>() * ArrayData::width(&e.dtype);
            let slice = bytes
                .get(e.offset..e.offset + len)
                .ok_or_else(|| Error::format(&bin, format!("array `{}` runs past the end of the file", e.name)))?;
            let data = ArrayData::from_bytes(&e.dtype, slice)
                .ok_or_else(|| Error::format(&json, format!("array `{}` has unknown dtype `{}`", e.name, e.dtype)))?;
            arrays.insert(e.name, Array { shape: e.shape, data });
        }
        Ok(Container { meta: sidecar.meta, arrays })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("ckpt");
        let mut c = Container::new(serde_json::json!({"tau_mem": 10.0}));
        c.insert("w", Array::new(vec![2, 2], ArrayData::F64(vec![1.0, -2.5, 0.0, 1e-300])).unwrap());
        c.insert("x", Array::new(vec![3], ArrayData::F32(vec![0.5, 0.0, 1.0])).unwrap());
        c.insert("labels", Array::new(vec![2], ArrayData::U32(vec![7, 0])).unwrap());
        c.insert("bits", Array::new(vec![1, 3], ArrayData::U8(vec![1, 0, 1])).unwrap());
        c.write(&base).unwrap();
        assert_eq!(Container::read(&base).unwrap(), c);
        assert!(Array::new(vec![2], ArrayData::U8(vec![1])).is_err());
        assert!(Container::read(&dir.path().join("missing")).is_err());
    }
}
