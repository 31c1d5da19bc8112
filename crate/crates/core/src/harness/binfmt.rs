//! Compact binary grid format with bit-exact round-trips.
//!
//! Layout: magic "QRPG", format version u32, header length u64, JSON
//! header (structure and metadata), then raw little-endian f64 payload
//! sections in the order the header's `sections` list names them. Mask
//! sections are one byte per cell. All integers little-endian.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::analysis::R2Grid;
use crate::model::Axis;
use crate::observables::{GridMeta, ObservableGrid};

const MAGIC: &[u8; 4] = b"QRPG";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Header {
    ObservableGrid {
        n_instances: usize,
        n_sites: usize,
        n_times: usize,
        axis: Axis,
        meta: GridMeta,
    },
    R2Grid {
        n_sites: usize,
        n_times: usize,
        threshold: f64,
    },
}

/// Atomic file write: temp file in the target directory, then rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let tmp = path.with_extension("tmp");
    let write = |p: &Path| -> io::Result<()> {
        let mut f = fs::File::create(p)?;
        f.write_all(bytes)?;
        f.sync_all()
    };
    write(&tmp).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

fn encode(header: &Header, sections: &[Payload<'_>]) -> Vec<u8> {
    let header_json = serde_json::to_vec(header).expect("header serializes");
    let mut out = Vec::with_capacity(
        16 + header_json.len()
            + sections
                .iter()
                .map(|s| match s {
                    Payload::F64(v) => v.len() * 8,
                    Payload::Mask(v) => v.len(),
                })
                .sum::<usize>(),
    );
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
    out.extend_from_slice(&header_json);
    for section in sections {
        match section {
            Payload::F64(values) => {
                for v in *values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            Payload::Mask(values) => {
                for &b in *values {
                    out.push(b as u8);
                }
            }
        }
    }
    out
}

enum Payload<'a> {
    F64(&'a [f64]),
    Mask(&'a [bool]),
}

struct Reader {
    bytes: Vec<u8>,
    pos: usize,
}

impl Reader {
    fn open(path: &Path) -> Result<(Self, Header), HarnessError> {
        let mut bytes = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| HarnessError::io(path, e))?;
        let bad = |reason: &str| HarnessError::Format {
            path: path.to_path_buf(),
            reason: reason.into(),
        };
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(bad("missing QRPG magic"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(bad(&format!("unsupported format version {version}")));
        }
        let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        if bytes.len() < 16 + header_len {
            return Err(bad("truncated header"));
        }
        let header: Header = serde_json::from_slice(&bytes[16..16 + header_len])
            .map_err(|e| bad(&format!("header JSON: {e}")))?;
        Ok((
            Self {
                bytes,
                pos: 16 + header_len,
            },
            header,
        ))
    }

    fn take_f64(&mut self, count: usize, path: &Path) -> Result<Vec<f64>, HarnessError> {
        let end = self.pos + count * 8;
        if self.bytes.len() < end {
            return Err(HarnessError::Format {
                path: path.to_path_buf(),
                reason: "truncated payload".into(),
            });
        }
        let values = self.bytes[self.pos..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        self.pos = end;
        Ok(values)
    }

    fn take_mask(&mut self, count: usize, path: &Path) -> Result<Vec<bool>, HarnessError> {
        let end = self.pos + count;
        if self.bytes.len() < end {
            return Err(HarnessError::Format {
                path: path.to_path_buf(),
                reason: "truncated payload".into(),
            });
        }
        let values = self.bytes[self.pos..end].iter().map(|&b| b != 0).collect();
        self.pos = end;
        Ok(values)
    }

    fn finish(self, path: &Path) -> Result<(), HarnessError> {
        if self.pos != self.bytes.len() {
            return Err(HarnessError::Format {
                path: path.to_path_buf(),
                reason: format!("{} trailing bytes", self.bytes.len() - self.pos),
            });
        }
        Ok(())
    }
}

pub fn write_observable_grid(path: &Path, grid: &ObservableGrid) -> Result<(), HarnessError> {
    let header = Header::ObservableGrid {
        n_instances: grid.n_instances(),
        n_sites: grid.n_sites(),
        n_times: grid.n_times(),
        axis: grid.observable_axis(),
        meta: grid.meta().clone(),
    };
    let bytes = encode(
        &header,
        &[Payload::F64(grid.times()), Payload::F64(grid.values())],
    );
    write_atomic(path, &bytes)
}

pub fn read_observable_grid(path: &Path) -> Result<ObservableGrid, HarnessError> {
    let (mut reader, header) = Reader::open(path)?;
    let Header::ObservableGrid {
        n_instances,
        n_sites,
        n_times,
        axis,
        meta,
    } = header
    else {
        return Err(HarnessError::Format {
            path: path.to_path_buf(),
            reason: "expected an observable grid".into(),
        });
    };
    let times = reader.take_f64(n_times, path)?;
    let values = reader.take_f64(n_instances * n_sites * n_times, path)?;
    reader.finish(path)?;
    ObservableGrid::from_parts(n_instances, n_sites, times, axis, meta, values).map_err(|e| {
        HarnessError::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }
    })
}

pub fn write_r2_grid(path: &Path, grid: &R2Grid) -> Result<(), HarnessError> {
    let header = Header::R2Grid {
        n_sites: grid.n_sites(),
        n_times: grid.n_times(),
        threshold: grid.threshold(),
    };
    let bytes = encode(
        &header,
        &[
            Payload::F64(grid.times()),
            Payload::F64(grid.r2_values()),
            Payload::F64(grid.delta_values()),
            Payload::Mask(grid.mask_values()),
        ],
    );
    write_atomic(path, &bytes)
}

pub fn read_r2_grid(path: &Path) -> Result<R2Grid, HarnessError> {
    let (mut reader, header) = Reader::open(path)?;
    let Header::R2Grid {
        n_sites,
        n_times,
        threshold,
    } = header
    else {
        return Err(HarnessError::Format {
            path: path.to_path_buf(),
            reason: "expected an r2 grid".into(),
        });
    };
    let cells = n_sites * n_times;
    let times = reader.take_f64(n_times, path)?;
    let r2 = reader.take_f64(cells, path)?;
    let delta = reader.take_f64(cells, path)?;
    let mask = reader.take_mask(cells, path)?;
    reader.finish(path)?;
    R2Grid::from_parts(n_sites, times, threshold, r2, delta, mask).map_err(|e| {
        HarnessError::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }
    })
}
