//! Output schemas: trajectory CSV, crossing-event records and the
//! `{re, im}` JSON encoding of complex numbers.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{CrossingDirection, CrossingEvent, Trajectory};

/// Serde adapter writing a complex number as `{"re": .., "im": ..}`.
pub mod complex_obj {
    use num_complex::Complex64;
    use serde::ser::SerializeStruct;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Complex", 2)?;
        st.serialize_field("re", &z.re)?;
        st.serialize_field("im", &z.im)?;
        st.end()
    }

    pub mod option {
        use num_complex::Complex64;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(z: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
            match z {
                Some(z) => super::serialize(z, s),
                None => s.serialize_none(),
            }
        }
    }

    pub mod vec {
        use num_complex::Complex64;
        use serde::ser::SerializeSeq;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(zs.len()))?;
            for z in zs {
                seq.serialize_element(&super::Wrap(*z))?;
            }
            seq.end()
        }
    }

    pub(crate) struct Wrap(pub Complex64);

    impl serde::Serialize for Wrap {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize(&self.0, s)
        }
    }
}

/// Round-trip-safe fixed formatting: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,re_z,im_z,re_r,im_r";

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for s in &traj.samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.z.re),
            fmt_f64(s.z.im),
            fmt_f64(s.r.re),
            fmt_f64(s.r.im)
        )?;
    }
    Ok(())
}

/// One crossing event as exported alongside a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord {
    pub t: f64,
    pub x: f64,
    pub re_v: f64,
    pub im_v: f64,
    pub re_r: f64,
    pub im_r: f64,
    pub direction: CrossingDirection,
}

impl From<&CrossingEvent> for EventRecord {
    fn from(ev: &CrossingEvent) -> Self {
        EventRecord {
            t: ev.t_cross,
            x: ev.x_cross,
            re_v: ev.v_cross.re,
            im_v: ev.v_cross.im,
            re_r: ev.r_cross.re,
            im_r: ev.r_cross.im,
            direction: ev.direction,
        }
    }
}

/// A trajectory sample in the JSON output format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub t: f64,
    pub re_z: f64,
    pub im_z: f64,
    pub re_r: f64,
    pub im_r: f64,
}

pub fn sample_records(traj: &Trajectory) -> Vec<SampleRecord> {
    traj.samples
        .iter()
        .map(|s| SampleRecord {
            t: s.t,
            re_z: s.z.re,
            im_z: s.z.im,
            re_r: s.r.re,
            im_r: s.r.im,
        })
        .collect()
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i`, `-i` (whitespace ignored).
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let bad = || format!("cannot parse `{s}` as a complex number (expected a+bi)");
    let parse_imag = |body: &str| -> Result<f64, String> {
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            b => b.parse::<f64>().map_err(|_| bad()),
        }
    };
    if let Some(body) = t.strip_suffix(['i', 'j']) {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&k| {
            (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
        });
        match split {
            Some(k) => {
                let re = body[..k].parse::<f64>().map_err(|_| bad())?;
                let im = parse_imag(&body[k..])?;
                Ok(Complex64::new(re, im))
            }
            None => Ok(Complex64::new(0.0, parse_imag(body)?)),
        }
    } else {
        t.parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_forms() {
        let c = Complex64::new;
        assert_eq!(parse_complex("1+0i").unwrap(), c(1.0, 0.0));
        assert_eq!(parse_complex("-0.375+0.33i").unwrap(), c(-0.375, 0.33));
        assert_eq!(parse_complex("2-3.5i").unwrap(), c(2.0, -3.5));
        assert_eq!(parse_complex("0.5").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1e-3-2e+1i").unwrap(), c(1e-3, -20.0));
        assert_eq!(parse_complex(" 1 + 2i ").unwrap(), c(1.0, 2.0));
        assert!(parse_complex("1+2").is_err());
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn complex_json_shape() {
        #[derive(Serialize)]
        struct W {
            #[serde(with = "complex_obj")]
            z: Complex64,
        }
        let s = serde_json::to_string(&W {
            z: Complex64::new(1.5, -2.0),
        })
        .unwrap();
        assert_eq!(s, r#"{"z":{"re":1.5,"im":-2.0}}"#);
    }

    proptest! {
        #[test]
        fn formatting_round_trips(re in -1e6f64..1e6, im in -1e6f64..1e6) {
            prop_assert_eq!(fmt_f64(re).parse::<f64>().unwrap(), re);
            let text = format!("{}{:+}i", fmt_f64(re), im);
            let z = parse_complex(&text).unwrap();
            prop_assert_eq!(z, Complex64::new(re, im));
        }
    }
}
