//! Flat binary policy file: magic, version byte, layer count and sizes as
//! little-endian u32, then every parameter as a little-endian f64.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{DqnError, Mlp};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"AVQN";
pub const CHECKPOINT_VERSION: u8 = 1;

pub fn write_checkpoint<W: Write>(net: &Mlp, mut w: W) -> Result<(), DqnError> {
    w.write_all(&CHECKPOINT_MAGIC)?;
    w.write_all(&[CHECKPOINT_VERSION])?;
    let sizes = net.layer_sizes();
    w.write_all(&(sizes.len() as u32).to_le_bytes())?;
    for &s in sizes {
        let s = u32::try_from(s)
            .map_err(|_| DqnError::Checkpoint(format!("layer width {s} does not fit in u32")))?;
        w.write_all(&s.to_le_bytes())?;
    }
    for p in net.parameters() {
        w.write_all(&p.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, DqnError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> DqnError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        DqnError::Checkpoint("truncated file".into())
    } else {
        DqnError::Io(e)
    }
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Mlp, DqnError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(DqnError::Checkpoint("wrong magic".into()));
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version).map_err(truncated)?;
    if version[0] != CHECKPOINT_VERSION {
        return Err(DqnError::Checkpoint(format!(
            "unsupported version {}",
            version[0]
        )));
    }
    let layers = read_u32(&mut r)? as usize;
    if !(2..=64).contains(&layers) {
        return Err(DqnError::Checkpoint(format!(
            "implausible layer count {layers}"
        )));
    }
    let sizes = (0..layers)
        .map(|_| read_u32(&mut r).map(|s| s as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let mut net = Mlp::zeros(&sizes)?;
    let mut params = vec![0.0; net.parameter_count()];
    let mut b = [0u8; 8];
    for p in &mut params {
        r.read_exact(&mut b).map_err(truncated)?;
        *p = f64::from_le_bytes(b);
    }
    if r.read(&mut b)? != 0 {
        return Err(DqnError::Checkpoint("trailing bytes".into()));
    }
    net.set_parameters(&params)?;
    Ok(net)
}

pub fn save_checkpoint(net: &Mlp, path: &Path) -> Result<(), DqnError> {
    write_checkpoint(net, BufWriter::new(File::create(path)?))
}

pub fn load_checkpoint(path: &Path) -> Result<Mlp, DqnError> {
    read_checkpoint(BufReader::new(File::open(path)?))
}
