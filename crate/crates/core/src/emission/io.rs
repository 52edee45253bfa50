use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{EmissionError, EmissionSample};

#[derive(Serialize, Deserialize)]
struct Row {
    g_prev: f64,
    g: f64,
    g_next: f64,
    #[serde(rename = "emission_tCO2")]
    emission: f64,
}

/// Reads samples from CSV with header `g_prev,g,g_next,emission_tCO2`.
pub fn read_samples_csv<R: Read>(reader: R) -> Result<Vec<EmissionSample>, EmissionError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<Row>().enumerate() {
        let r = rec.map_err(|e| EmissionError::Csv(format!("row {}: {e}", i + 1)))?;
        if [r.g_prev, r.g, r.g_next, r.emission].iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(EmissionError::Csv(format!("row {}: values must be finite and non-negative", i + 1)));
        }
        out.push(EmissionSample {
            g_prev: r.g_prev,
            g: r.g,
            g_next: r.g_next,
            emission: r.emission,
        });
    }
    Ok(out)
}

/// Writes samples as CSV; an empty slice yields a header-only file.
pub fn write_samples_csv<W: Write>(writer: W, samples: &[EmissionSample]) -> Result<(), EmissionError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let err = |e: csv::Error| EmissionError::Csv(e.to_string());
    w.write_record(["g_prev", "g", "g_next", "emission_tCO2"]).map_err(err)?;
    for s in samples {
        w.serialize(Row {
            g_prev: s.g_prev,
            g: s.g,
            g_next: s.g_next,
            emission: s.emission,
        })
        .map_err(err)?;
    }
    w.flush().map_err(|e| EmissionError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = vec![
            EmissionSample { g_prev: 1.5, g: 2.0, g_next: 2.0, emission: 30.25 },
            EmissionSample { g_prev: 0.0, g: 0.0, g_next: 0.0, emission: 11.53 },
        ];
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("g_prev,g,g_next,emission_tCO2\n"));
        assert_eq!(read_samples_csv(&buf[..]).unwrap(), s);
    }

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "g_prev,g,g_next,emission_tCO2\n");
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(read_samples_csv("g_prev,g,g_next,emission_tCO2\n1,2,x,4\n".as_bytes()).is_err());
        assert!(read_samples_csv("g_prev,g,g_next,emission_tCO2\n1,2,3,-4\n".as_bytes()).is_err());
    }
}
