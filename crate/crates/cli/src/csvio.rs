//! The draw format: header `sample_id,k,re,im`, one row per coefficient per
//! draw, values with 17 significant digits.

use std::io::{Read, Write};

use anyhow::{anyhow, bail, Result};
use num_complex::Complex64 as C64;

pub const HEADER: [&str; 4] = ["sample_id", "k", "re", "im"];

/// Draws read back from CSV; `values[i]` follows the order of `keys`.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    pub keys: Vec<i64>,
    pub values: Vec<Vec<C64>>,
}

pub fn write_draws<W: Write>(out: W, keys: &[i64], draws: &[Vec<C64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for (id, draw) in draws.iter().enumerate() {
        for (k, z) in keys.iter().zip(draw) {
            w.write_record([
                id.to_string(),
                k.to_string(),
                format!("{:.16e}", z.re),
                format!("{:.16e}", z.im),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads draws, failing on the first malformed row with its line number.
pub fn read_draws<R: Read>(input: R) -> Result<Draws> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let header = rdr.headers().map_err(|e| anyhow!("row 1: {e}"))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        bail!("row 1: expected header sample_id,k,re,im, got {:?}", header.iter().collect::<Vec<_>>());
    }
    let mut keys: Vec<i64> = vec![];
    let mut values: Vec<Vec<C64>> = vec![];
    let mut current: Option<u64> = None;
    let mut key_pos = 0usize;
    let mut first_done = false;
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| anyhow!("row {line}: {e}"))?;
        if rec.len() != 4 {
            bail!("row {line}: expected 4 fields, got {}", rec.len());
        }
        let id: u64 = rec[0].trim().parse().map_err(|_| anyhow!("row {line}: bad sample_id {:?}", &rec[0]))?;
        let k: i64 = rec[1].trim().parse().map_err(|_| anyhow!("row {line}: bad k {:?}", &rec[1]))?;
        let re: f64 = rec[2].trim().parse().map_err(|_| anyhow!("row {line}: bad re {:?}", &rec[2]))?;
        let im: f64 = rec[3].trim().parse().map_err(|_| anyhow!("row {line}: bad im {:?}", &rec[3]))?;
        if !re.is_finite() || !im.is_finite() {
            bail!("row {line}: non-finite value");
        }
        if current != Some(id) {
            if let Some(prev) = current {
                if id != prev + 1 {
                    bail!("row {line}: sample_id {id} does not follow {prev}");
                }
                if key_pos != keys.len() {
                    bail!("row {line}: sample {prev} has {key_pos} coefficients, expected {}", keys.len());
                }
                first_done = true;
            } else if id != 0 {
                bail!("row {line}: sample ids must start at 0");
            }
            current = Some(id);
            key_pos = 0;
            values.push(vec![]);
        }
        if first_done {
            if key_pos >= keys.len() || keys[key_pos] != k {
                bail!("row {line}: unexpected k {k} in sample {id}");
            }
        } else {
            if keys.contains(&k) {
                bail!("row {line}: duplicate k {k} in sample {id}");
            }
            keys.push(k);
        }
        key_pos += 1;
        values.last_mut().expect("pushed above").push(C64::new(re, im));
    }
    if values.is_empty() {
        bail!("no data rows");
    }
    if key_pos != keys.len() {
        bail!("last sample has {key_pos} coefficients, expected {}", keys.len());
    }
    Ok(Draws { keys, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let keys = [2, 1, 0, -1, -2];
        let draws: Vec<Vec<C64>> = (0..3)
            .map(|i| (0..5).map(|k| C64::new(0.1 * i as f64 + 1.0 / 3.0, -(k as f64).sqrt() * 1e-7)).collect())
            .collect();
        let mut buf = vec![];
        write_draws(&mut buf, &keys, &draws).unwrap();
        let back = read_draws(buf.as_slice()).unwrap();
        assert_eq!(back.keys, keys);
        assert_eq!(back.values, draws);
    }

    #[test]
    fn names_bad_row() {
        let text = "sample_id,k,re,im\n0,1,0.5,0\n0,-1,abc,0\n";
        let err = read_draws(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 3"), "{err}");
        let text = "sample_id,k,re,im\n0,1,0.5,0\n0,-1,0.5,0\n1,1,0.5,0\n";
        assert!(read_draws(text.as_bytes()).unwrap_err().to_string().contains("last sample"));
        assert!(read_draws("a,b\n".as_bytes()).unwrap_err().to_string().contains("row 1"));
    }
}
