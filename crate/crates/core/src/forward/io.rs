//! Text format for MSR matrices.
//!
//! ```text
//! # submig-msr v1
//! N 48
//! omega 1.2566370614359172e1
//! provenance clean
//! seed none
//! <re> <im> <re> <im> ...      (one line per row, N pairs)
//! ```
//!
//! Noisy matrices record each noise layer as
//! `provenance noisy snr_db=<x> seed=<s> stream=<k>[; ...]` and the last seed on
//! the `seed` line. Floats are written with 17 significant digits, which
//! round-trips every `f64` exactly. Directions are not stored: readers rebuild
//! the standard equiangular set for `N`.

use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::{make_directions, MsrMatrix, NoiseRecord, Provenance};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub const MSR_FORMAT_HEADER: &str = "# submig-msr v1";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_msr<W: Write>(k: &MsrMatrix, mut w: W) -> Result<()> {
    writeln!(w, "{MSR_FORMAT_HEADER}")?;
    writeln!(w, "N {}", k.n())?;
    writeln!(w, "omega {}", fmt_f64(k.omega))?;
    if k.provenance.is_clean() {
        writeln!(w, "provenance clean")?;
        writeln!(w, "seed none")?;
    } else {
        let layers: Vec<String> = k
            .provenance
            .noise
            .iter()
            .map(|r| {
                format!(
                    "snr_db={} seed={} stream={}",
                    fmt_f64(r.snr_db),
                    r.seed,
                    r.stream
                )
            })
            .collect();
        writeln!(w, "provenance noisy {}", layers.join("; "))?;
        let last = k
            .provenance
            .noise
            .last()
            .expect("noisy provenance has a layer");
        writeln!(w, "seed {}", last.seed)?;
    }
    for j in 0..k.n() {
        let row: Vec<String> = (0..k.n())
            .map(|l| {
                let z = k.get(j, l);
                format!("{} {}", fmt_f64(z.re), fmt_f64(z.im))
            })
            .collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

fn header_value<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::parse(format!("missing '{key}' line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::parse(format!("expected '{key} ...', got '{line}'")))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(format!("bad number '{s}'")))
}

fn parse_layer(s: &str) -> Result<NoiseRecord> {
    let mut snr = None;
    let mut seed = None;
    let mut stream = None;
    for kv in s.split_whitespace() {
        let (key, val) = kv
            .split_once('=')
            .ok_or_else(|| Error::parse(format!("bad provenance field '{kv}'")))?;
        match key {
            "snr_db" => snr = Some(parse_f64(val)?),
            "seed" => {
                seed = Some(
                    val.parse()
                        .map_err(|_| Error::parse(format!("bad seed '{val}'")))?,
                )
            }
            "stream" => {
                stream = Some(
                    val.parse()
                        .map_err(|_| Error::parse(format!("bad stream '{val}'")))?,
                )
            }
            _ => return Err(Error::parse(format!("unknown provenance field '{key}'"))),
        }
    }
    match (snr, seed, stream) {
        (Some(snr_db), Some(seed), Some(stream)) => Ok(NoiseRecord {
            snr_db,
            seed,
            stream,
        }),
        _ => Err(Error::parse(format!("incomplete noise record '{s}'"))),
    }
}

pub fn read_msr<R: BufRead>(r: R) -> Result<MsrMatrix> {
    let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines
        .iter()
        .map(String::as_str)
        .filter(|l| !l.trim().is_empty());
    match it.next() {
        Some(h) if h.trim() == MSR_FORMAT_HEADER => {}
        other => {
            return Err(Error::parse(format!(
                "expected '{MSR_FORMAT_HEADER}', got {other:?}"
            )))
        }
    }
    let n: usize = header_value(it.next(), "N")?
        .trim()
        .parse()
        .map_err(|_| Error::parse("bad N"))?;
    let omega = parse_f64(header_value(it.next(), "omega")?)?;
    let prov = header_value(it.next(), "provenance")?.trim();
    let provenance = if prov == "clean" {
        Provenance::default()
    } else if let Some(rest) = prov.strip_prefix("noisy ") {
        Provenance {
            noise: rest.split(';').map(parse_layer).collect::<Result<_>>()?,
        }
    } else {
        return Err(Error::parse(format!("bad provenance '{prov}'")));
    };
    let _seed = header_value(it.next(), "seed")?;

    let mut data = Vec::with_capacity(n * n);
    for j in 0..n {
        let line = it
            .next()
            .ok_or_else(|| Error::parse(format!("missing row {j}")))?;
        let nums = line
            .split_whitespace()
            .map(parse_f64)
            .collect::<Result<Vec<_>>>()?;
        if nums.len() != 2 * n {
            return Err(Error::parse(format!(
                "row {j} has {} numbers, expected {}",
                nums.len(),
                2 * n
            )));
        }
        data.extend(nums.chunks(2).map(|c| Complex64::new(c[0], c[1])));
    }
    let dirs = Arc::new(make_directions(n)?);
    let mut k = MsrMatrix::new(omega, dirs, ComplexMatrix::from_row_major(n, n, data))?;
    k.provenance = provenance;
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::add_awgn;
    use proptest::prelude::*;

    fn matrix_from(values: &[(f64, f64)], n: usize, omega: f64) -> MsrMatrix {
        let data = values.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let dirs = Arc::new(make_directions(n).unwrap());
        MsrMatrix::new(omega, dirs, ComplexMatrix::from_row_major(n, n, data)).unwrap()
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless(
            values in prop::collection::vec((-1e6f64..1e6, -1e-9f64..1e-9), 9),
            omega in 0.1f64..100.0,
            seed in any::<u64>(),
            noisy in any::<bool>(),
        ) {
            let mut k = matrix_from(&values, 3, omega);
            if noisy {
                k = add_awgn(&k, 7.25, seed).unwrap();
            }
            let mut buf = Vec::new();
            write_msr(&k, &mut buf).unwrap();
            let back = read_msr(buf.as_slice()).unwrap();
            prop_assert_eq!(back, k);
        }
    }

    #[test]
    fn rejects_truncated_input() {
        let k = matrix_from(&[(1.0, 2.0); 4], 2, 3.0);
        let mut buf = Vec::new();
        write_msr(&k, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(matches!(read_msr(cut.as_bytes()), Err(Error::Parse(_))));
        assert!(read_msr("hello\n".as_bytes()).is_err());
    }

    #[test]
    fn header_layout() {
        let k = matrix_from(&[(0.5, -0.25); 4], 2, 12.5);
        let mut buf = Vec::new();
        write_msr(&k, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], MSR_FORMAT_HEADER);
        assert_eq!(lines[1], "N 2");
        assert_eq!(lines[2], "omega 1.2500000000000000e1");
        assert_eq!(lines[3], "provenance clean");
        assert_eq!(lines[4], "seed none");
        assert_eq!(lines[5], "5.0000000000000000e-1 -2.5000000000000000e-1 5.0000000000000000e-1 -2.5000000000000000e-1");
    }
}
