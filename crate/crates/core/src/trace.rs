//! Sampled scan data: the laser-induced-fluorescence channel plus the
//! optional etalon marker channel, with CSV (de)serialization.
//!
//! A trace abscissa is either raw sample indices (fresh from a scan, before
//! axis reconstruction) or calibrated frequencies in MHz; the
//! `frequency_axis_valid` flag records which. CSV files do not carry the
//! flag, so loading applies a conservative heuristic: an abscissa equal to
//! the consecutive integers 0, 1, 2, ... is treated as raw sample indices,
//! anything else as a frequency axis. The synthesis and linearization code
//! paths set the flag explicitly and never rely on the heuristic.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sample of a scan.
#[derive(Debug, Copy, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Sample index or frequency in MHz, depending on the trace flag.
    pub abscissa: f64,
    /// Fluorescence detector value.
    pub lif: f64,
    /// Etalon (marker) detector value, when recorded.
    pub fpi: Option<f64>,
}

/// A recorded or synthesized scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    samples: Vec<Sample>,
    /// True when the abscissa is a calibrated frequency axis in MHz.
    pub frequency_axis_valid: bool,
}

/// The exact header line of the trace CSV format.
pub const TRACE_CSV_HEADER: &str = "abscissa,lif,fpi";

impl Trace {
    /// Builds a trace, checking the invariants: strictly increasing
    /// abscissa, finite lif everywhere, finite fpi where present.
    pub fn new(samples: Vec<Sample>, frequency_axis_valid: bool) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !s.abscissa.is_finite() {
                return Err(Error::NonFiniteSample {
                    channel: "abscissa",
                    index: i,
                });
            }
            if !s.lif.is_finite() {
                return Err(Error::NonFiniteSample {
                    channel: "lif",
                    index: i,
                });
            }
            if let Some(fpi) = s.fpi {
                if !fpi.is_finite() {
                    return Err(Error::NonFiniteSample {
                        channel: "fpi",
                        index: i,
                    });
                }
            }
            if i > 0 && samples[i - 1].abscissa >= s.abscissa {
                return Err(Error::AxisNotIncreasing { index: i });
            }
        }
        Ok(Trace {
            samples,
            frequency_axis_valid,
        })
    }

    /// Convenience constructor from parallel columns.
    pub fn from_columns(
        abscissa: Vec<f64>,
        lif: Vec<f64>,
        fpi: Option<Vec<f64>>,
        frequency_axis_valid: bool,
    ) -> Result<Self> {
        assert_eq!(abscissa.len(), lif.len(), "column lengths differ");
        if let Some(fpi) = &fpi {
            assert_eq!(abscissa.len(), fpi.len(), "column lengths differ");
        }
        let samples = abscissa
            .into_iter()
            .zip(lif)
            .enumerate()
            .map(|(i, (a, l))| Sample {
                abscissa: a,
                lif: l,
                fpi: fpi.as_ref().map(|f| f[i]),
            })
            .collect();
        Trace::new(samples, frequency_axis_valid)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The abscissa column as an owned vector.
    pub fn abscissa(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.abscissa).collect()
    }

    /// The lif column as an owned vector.
    pub fn lif(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.lif).collect()
    }

    /// Returns a copy of this trace with the abscissa replaced (used when a
    /// reconstructed frequency axis supersedes raw sample indices). The new
    /// abscissa must have one value per sample and be strictly increasing.
    pub fn with_abscissa(&self, abscissa: &[f64], frequency_axis_valid: bool) -> Result<Trace> {
        if abscissa.len() != self.samples.len() {
            return Err(Error::LengthMismatch {
                expected: self.samples.len(),
                got: abscissa.len(),
            });
        }
        let samples = self
            .samples
            .iter()
            .zip(abscissa)
            .map(|(s, &a)| Sample { abscissa: a, ..*s })
            .collect();
        Trace::new(samples, frequency_axis_valid)
    }

    /// True when the abscissa is exactly the consecutive integers
    /// 0, 1, 2, ... — the signature of a raw scan that was never run
    /// through axis reconstruction.
    pub fn looks_like_sample_indices(&self) -> bool {
        self.samples.len() >= 2
            && self
                .samples
                .iter()
                .enumerate()
                .all(|(i, s)| s.abscissa == i as f64)
    }

    /// Writes the `abscissa,lif,fpi` CSV. Values are formatted with Rust's
    /// shortest-round-trip float formatting, so write/read round trips are
    /// bit-exact and repeated runs are byte-identical.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRACE_CSV_HEADER}")?;
        for s in &self.samples {
            match s.fpi {
                Some(fpi) => writeln!(w, "{},{},{}", s.abscissa, s.lif, fpi)?,
                None => writeln!(w, "{},{},", s.abscissa, s.lif)?,
            }
        }
        Ok(())
    }

    /// Writes the CSV to a file path.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut file)?;
        Ok(())
    }

    /// Reads the CSV format. Errors carry 1-based line numbers. The
    /// frequency-axis flag is set by [`Trace::looks_like_sample_indices`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut samples = Vec::new();
        let mut lines = r.lines();

        let header = match lines.next() {
            Some(line) => line?,
            None => {
                return Err(Error::TraceParse {
                    line: 1,
                    msg: "empty file (expected header 'abscissa,lif,fpi')".into(),
                })
            }
        };
        if header.trim_end_matches('\r').trim() != TRACE_CSV_HEADER {
            return Err(Error::TraceParse {
                line: 1,
                msg: format!("bad header '{}' (expected '{TRACE_CSV_HEADER}')", header.trim()),
            });
        }

        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::TraceParse {
                    line: lineno,
                    msg: format!("expected 3 comma-separated fields, got {}", fields.len()),
                });
            }
            let parse = |name: &str, text: &str| -> Result<f64> {
                text.trim().parse::<f64>().map_err(|_| Error::TraceParse {
                    line: lineno,
                    msg: format!("bad {name} value '{}'", text.trim()),
                })
            };
            let abscissa = parse("abscissa", fields[0])?;
            let lif = parse("lif", fields[1])?;
            let fpi = if fields[2].trim().is_empty() {
                None
            } else {
                Some(parse("fpi", fields[2])?)
            };
            samples.push(Sample { abscissa, lif, fpi });
        }

        // Validate via the constructor but map ordering violations to parse
        // errors with line numbers (header + 1-based data rows).
        let trace = Trace::new(samples, false).map_err(|e| match e {
            Error::AxisNotIncreasing { index } => Error::TraceParse {
                line: index + 2,
                msg: "abscissa not strictly increasing".into(),
            },
            Error::NonFiniteSample { channel, index } => Error::TraceParse {
                line: index + 2,
                msg: format!("non-finite {channel} value"),
            },
            other => other,
        })?;
        let flag = !trace.looks_like_sample_indices();
        Ok(Trace {
            frequency_axis_valid: flag,
            ..trace
        })
    }

    /// Reads the CSV from a file path.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        Trace::read_csv(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_with_fpi() -> Trace {
        Trace::from_columns(
            vec![0.0, 1.0, 2.5],
            vec![1.25, 2.5, 0.125],
            Some(vec![0.5, 0.25, 0.75]),
            false,
        )
        .unwrap()
    }

    #[test]
    fn constructor_rejects_bad_axes_and_values() {
        assert!(matches!(
            Trace::from_columns(vec![0.0, 0.0], vec![1.0, 1.0], None, false),
            Err(Error::AxisNotIncreasing { index: 1 })
        ));
        assert!(matches!(
            Trace::from_columns(vec![0.0, 1.0], vec![1.0, f64::NAN], None, false),
            Err(Error::NonFiniteSample { channel: "lif", index: 1 })
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = trace_with_fpi();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = Trace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.samples(), t.samples());
    }

    #[test]
    fn csv_round_trip_preserves_missing_fpi() {
        let t = Trace::from_columns(vec![-5.0, 0.0, 5.0], vec![0.1, 0.9, 0.1], None, true).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(','));
        let back = Trace::read_csv(buf.as_slice()).unwrap();
        assert!(back.samples().iter().all(|s| s.fpi.is_none()));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "abscissa,lif,fpi\n0,1.0,\n1,oops,\n";
        match Trace::read_csv(text.as_bytes()) {
            Err(Error::TraceParse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("lif"), "msg was '{msg}'");
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        let text = "wrong,header\n";
        assert!(matches!(
            Trace::read_csv(text.as_bytes()),
            Err(Error::TraceParse { line: 1, .. })
        ));
    }

    #[test]
    fn index_axis_heuristic() {
        let raw = "abscissa,lif,fpi\n0,1.0,\n1,2.0,\n2,3.0,\n";
        let t = Trace::read_csv(raw.as_bytes()).unwrap();
        assert!(t.looks_like_sample_indices());
        assert!(!t.frequency_axis_valid);

        let freq = "abscissa,lif,fpi\n-100.5,1.0,\n0,2.0,\n100.5,3.0,\n";
        let t = Trace::read_csv(freq.as_bytes()).unwrap();
        assert!(!t.looks_like_sample_indices());
        assert!(t.frequency_axis_valid);
    }

    #[test]
    fn with_abscissa_swaps_axis() {
        let t = trace_with_fpi();
        let freq = t.with_abscissa(&[-10.0, 0.0, 10.0], true).unwrap();
        assert_eq!(freq.abscissa(), vec![-10.0, 0.0, 10.0]);
        assert_eq!(freq.lif(), t.lif());
        assert!(freq.frequency_axis_valid);
        assert!(t.with_abscissa(&[1.0, 2.0], true).is_err());
    }
}
