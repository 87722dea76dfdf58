//! Spiking Heidelberg Digits files: `spikes/times` and `spikes/units` hold
//! one variable-length array per sample, `labels` the class ids and
//! `extra/keys` one name per class.

use std::path::{Path, PathBuf};

use hdf5::types::VarLenArray;

use super::{EventSample, SpikeDataset, Split};
use crate::error::{Error, Result};

/// Cochlea model channels of the distributed dataset.
pub const SHD_CHANNELS: usize = 700;

fn h5(path: &Path) -> impl Fn(hdf5::Error) -> Error + '_ {
    move |source| Error::Hdf5 { path: path.to_path_buf(), source }
}

/// A directory resolves to its `shd_<split>.h5`.
fn resolve(path: &Path, split: Split) -> PathBuf {
    if path.is_dir() {
        path.join(format!("shd_{}.h5", split.as_str()))
    } else {
        path.to_path_buf()
    }
}

pub fn load_shd(path: &Path, split: Split) -> Result<SpikeDataset> {
    let file_path = resolve(path, split);
    if !file_path.is_file() {
        return Err(Error::io(
            &file_path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found"),
        ));
    }
    let err = h5(&file_path);
    let file = hdf5::File::open(&file_path).map_err(&err)?;
    let schema = |msg: String| Error::format(&file_path, msg);
    let dataset = |name: &str| file.dataset(name).map_err(|_| schema(format!("missing dataset `{name}`")));

    let times: Vec<VarLenArray<f32>> = dataset("spikes/times")?.read_raw().map_err(&err)?;
    let units: Vec<VarLenArray<u16>> = dataset("spikes/units")?.read_raw().map_err(&err)?;
    let labels: Vec<u32> = dataset("labels")?.read_raw().map_err(&err)?;
    if times.len() != units.len() || times.len() != labels.len() {
        return Err(schema(format!(
            "{} time arrays, {} unit arrays and {} labels",
            times.len(),
            units.len(),
            labels.len()
        )));
    }
    let n_channels = match file.attr("n_channels") {
        Ok(a) => a.read_scalar::<u32>().map_err(&err)? as usize,
        Err(_) => SHD_CHANNELS,
    };
    let n_classes = match file.dataset("extra/keys") {
        Ok(keys) => keys.size(),
        Err(_) => match file.attr("n_classes") {
            Ok(a) => a.read_scalar::<u32>().map_err(&err)? as usize,
            Err(_) => labels.iter().max().map_or(0, |&m| m as usize + 1),
        },
    };
    let samples = times
        .iter()
        .zip(&units)
        .map(|(t, u)| EventSample { times: t.to_vec(), units: u.iter().map(|&u| u as u32).collect() })
        .collect();
    let data = SpikeDataset {
        samples,
        labels: labels.iter().map(|&y| y as usize).collect(),
        n_channels,
        n_classes,
        split,
    };
    data.validate().map_err(|e| schema(e.to_string()))?;
    Ok(data)
}

/// Writes a dataset in the same layout (class names become `class_<i>`).
pub fn write_shd(path: &Path, data: &SpikeDataset) -> Result<()> {
    data.validate()?;
    let err = h5(path);
    let file = hdf5::File::create(path).map_err(&err)?;
    let spikes = file.create_group("spikes").map_err(&err)?;
    let times: Vec<VarLenArray<f32>> = data.samples.iter().map(|s| VarLenArray::from_slice(&s.times)).collect();
    let units: Vec<VarLenArray<u16>> = data
        .samples
        .iter()
        .map(|s| {
            let u: Vec<u16> = s.units.iter().map(|&u| u as u16).collect();
            VarLenArray::from_slice(&u)
        })
        .collect();
    if data.n_channels > u16::MAX as usize + 1 {
        return Err(Error::Domain("channel indices do not fit the 16-bit unit arrays".into()));
    }
    spikes.new_dataset_builder().with_data(&times).create("times").map_err(&err)?;
    spikes.new_dataset_builder().with_data(&units).create("units").map_err(&err)?;
    let labels: Vec<u16> = data.labels.iter().map(|&y| y as u16).collect();
    file.new_dataset_builder().with_data(&labels).create("labels").map_err(&err)?;
    let extra = file.create_group("extra").map_err(&err)?;
    let keys: Vec<hdf5::types::VarLenUnicode> =
        (0..data.n_classes).map(|i| format!("class_{i}").parse().expect("ascii name")).collect();
    extra.new_dataset_builder().with_data(&keys).create("keys").map_err(&err)?;
    file.new_attr::<u32>().create("n_channels").map_err(&err)?.write_scalar(&(data.n_channels as u32)).map_err(&err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_paths_are_io_errors() {
        assert!(matches!(load_shd(Path::new(""), Split::Train), Err(Error::Io { .. })));
        let dir = tempfile::tempdir().unwrap();
        match load_shd(dir.path(), Split::Test) {
            Err(Error::Io { path, .. }) => assert!(path.ends_with("shd_test.h5")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let data = SpikeDataset {
            samples: vec![
                EventSample { times: vec![0.0, 0.25, 0.5], units: vec![3, 699, 0] },
                EventSample::default(),
                EventSample { times: vec![0.75], units: vec![12] },
            ],
            labels: vec![2, 0, 19],
            n_channels: SHD_CHANNELS,
            n_classes: 20,
            split: Split::Train,
        };
        write_shd(&dir.path().join("shd_train.h5"), &data).unwrap();
        let back = load_shd(dir.path(), Split::Train).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn schema_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.h5");
        hdf5::File::create(&path).unwrap().create_group("spikes").unwrap();
        assert!(matches!(load_shd(&path, Split::Train), Err(Error::Format { .. })));
    }
}
