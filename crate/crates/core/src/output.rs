//! Run outputs: `diagnostics.csv`, `field.csv`, coefficient snapshots and a
//! JSON manifest. Numbers are written with 17 significant digits so files are
//! byte-identical across identical runs.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::diagnostics::DiagnosticsRecord;
use crate::driver::{AdaptationEvent, RunConfig};
use crate::error::{Error, Result};
use crate::hermite::HermiteBasisParams;
use crate::state::{CoeffMatrix, SpeciesInfo, SpeciesState, SpectralState};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn diagnostics_header(species: &[String]) -> String {
    let mut h = String::from("t");
    for name in species {
        for col in ["mass", "momentum", "ekin", "alpha", "u"] {
            write!(h, ",{col}_{name}").unwrap();
        }
    }
    h.push_str(",epot,mass_err,mom_err,energy_err,fmin,fmax,e_l2");
    h
}

pub fn diagnostics_row(r: &DiagnosticsRecord) -> String {
    let mut row = num(r.t);
    for s in &r.species {
        for v in [s.mass, s.momentum, s.kinetic, s.alpha, s.u] {
            row.push(',');
            row.push_str(&num(v));
        }
    }
    for v in [r.potential, r.mass_err, r.momentum_err, r.energy_err, r.f_min, r.f_max, r.e_l2] {
        row.push(',');
        row.push_str(&num(v));
    }
    row
}

/// Line-buffered CSV writer for per-step diagnostics.
pub struct DiagnosticsWriter {
    out: BufWriter<File>,
}

impl DiagnosticsWriter {
    pub fn create(path: &Path, species: &[String]) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", diagnostics_header(species))?;
        Ok(DiagnosticsWriter { out })
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        writeln!(self.out, "{}", diagnostics_row(r))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// `t,k,re,im` rows of the field's Fourier coefficients.
pub struct FieldWriter {
    out: BufWriter<File>,
}

impl FieldWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "t,k,re,im")?;
        Ok(FieldWriter { out })
    }

    pub fn write(&mut self, t: f64, field: &[Complex64]) -> Result<()> {
        for (k, e) in field.iter().enumerate() {
            writeln!(self.out, "{},{k},{},{}", num(t), num(e.re), num(e.im))?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Text snapshot:
///
/// ```text
/// # awh-vlasov snapshot
/// # time=<t> length=<L> nv=<Nv> nx=<Nx> species=<S>
/// # species=<s> name=<name> charge=<q> mass=<m> alpha=<alpha> u=<u>
/// species,n,k,re,im
/// 0,0,0,1.0e0,0.0e0
/// ...
/// ```
pub fn snapshot_string(state: &SpectralState) -> String {
    let mut s = String::from("# awh-vlasov snapshot\n");
    writeln!(
        s,
        "# time={} length={} nv={} nx={} species={}",
        num(state.time),
        num(state.length),
        state.nv(),
        state.nx(),
        state.species.len()
    )
    .unwrap();
    for (i, sp) in state.species.iter().enumerate() {
        writeln!(
            s,
            "# species={i} name={} charge={} mass={} alpha={} u={}",
            sp.info.name,
            num(sp.info.charge),
            num(sp.info.mass),
            num(sp.basis.alpha),
            num(sp.basis.u)
        )
        .unwrap();
    }
    s.push_str("species,n,k,re,im\n");
    for (i, sp) in state.species.iter().enumerate() {
        for n in 0..=sp.coeffs.nv() {
            for (k, c) in sp.coeffs.row(n).iter().enumerate() {
                writeln!(s, "{i},{n},{k},{},{}", num(c.re), num(c.im)).unwrap();
            }
        }
    }
    s
}

pub fn write_snapshot(path: &Path, state: &SpectralState) -> Result<()> {
    std::fs::write(path, snapshot_string(state))?;
    Ok(())
}

fn header_fields(line: &str) -> impl Iterator<Item = (&str, &str)> {
    line.trim_start_matches('#').split_whitespace().filter_map(|kv| kv.split_once('='))
}

fn field<T: std::str::FromStr>(line: &str, key: &str) -> Result<T> {
    header_fields(line)
        .find(|(k, _)| *k == key)
        .ok_or_else(|| Error::Parse(format!("snapshot header lacks '{key}'")))?
        .1
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for '{key}' in snapshot header")))
}

/// Reads a snapshot written by [`write_snapshot`]. The field is recomputed
/// from Poisson's equation when the species are neutral, else left at zero.
pub fn read_snapshot(path: &Path) -> Result<SpectralState> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let mut next =
        || -> Result<String> { lines.next().ok_or_else(|| Error::Parse("truncated snapshot".into()))?.map_err(Error::from) };

    let magic = next()?;
    if !magic.starts_with("# awh-vlasov snapshot") {
        return Err(Error::Parse("not a snapshot file".into()));
    }
    let head = next()?;
    let time: f64 = field(&head, "time")?;
    let length: f64 = field(&head, "length")?;
    let nv: usize = field(&head, "nv")?;
    let nx: usize = field(&head, "nx")?;
    let ns: usize = field(&head, "species")?;

    let mut species = Vec::with_capacity(ns);
    for _ in 0..ns {
        let l = next()?;
        let name: String = field(&l, "name")?;
        species.push(SpeciesState {
            info: SpeciesInfo { name, charge: field(&l, "charge")?, mass: field(&l, "mass")? },
            basis: HermiteBasisParams::new(field(&l, "alpha")?, field(&l, "u")?)?,
            coeffs: CoeffMatrix::zeros(nv, nx),
        });
    }
    if next()?.trim() != "species,n,k,re,im" {
        return Err(Error::Parse("missing coefficient header".into()));
    }
    let mut count = 0usize;
    for line in lines.by_ref() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Parse(format!("bad snapshot row '{line}'")));
        }
        let bad = || Error::Parse(format!("bad snapshot row '{line}'"));
        let s: usize = parts[0].parse().map_err(|_| bad())?;
        let n: usize = parts[1].parse().map_err(|_| bad())?;
        let k: usize = parts[2].parse().map_err(|_| bad())?;
        let re: f64 = parts[3].parse().map_err(|_| bad())?;
        let im: f64 = parts[4].parse().map_err(|_| bad())?;
        if s >= ns || n > nv || k > nx {
            return Err(bad());
        }
        species[s].coeffs.set(n, k, Complex64::new(re, im));
        count += 1;
    }
    if count != ns * (nv + 1) * (nx + 1) {
        return Err(Error::Parse(format!("snapshot has {count} coefficient rows")));
    }
    let mut state = SpectralState { length, species, field: vec![Complex64::new(0.0, 0.0); nx + 1], time };
    if let Ok(e) = crate::residual::poisson_field(&state) {
        state.field = e;
    }
    Ok(state)
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub program: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub steps: usize,
    pub final_time: f64,
    pub wall_time_seconds: f64,
    pub status: String,
    pub newton_iterations: usize,
    pub gmres_iterations: usize,
    pub adaptations: &'a [AdaptationEvent],
}

pub fn write_manifest(path: &Path, m: &Manifest<'_>) -> Result<()> {
    let text = serde_json::to_string_pretty(m).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{two_stream_init, TwoStreamParams};

    #[test]
    fn snapshot_round_trip_is_exact() {
        let mut st = two_stream_init(&TwoStreamParams::default(), 5, 3).unwrap();
        st.species[0].coeffs.set(3, 2, Complex64::new(0.123_456_789_012_345_68, -1e-300));
        st.time = 1.25;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("snap.csv");
        write_snapshot(&p, &st).unwrap();
        let back = read_snapshot(&p).unwrap();
        assert_eq!(back.time, st.time);
        assert_eq!(back.length, st.length);
        for (a, b) in back.species.iter().zip(&st.species) {
            assert_eq!(a.coeffs, b.coeffs);
            assert_eq!(a.basis, b.basis);
            assert_eq!(a.info, b.info);
        }
        assert_eq!(back.field, st.field);
    }

    #[test]
    fn corrupt_snapshot_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "hello\n").unwrap();
        assert!(read_snapshot(&p).is_err());
        let st = two_stream_init(&TwoStreamParams::default(), 2, 1).unwrap();
        let text = snapshot_string(&st);
        let cut: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        std::fs::write(&p, cut).unwrap();
        assert!(matches!(read_snapshot(&p), Err(Error::Parse(_))));
    }

    #[test]
    fn diagnostics_columns_line_up() {
        let h = diagnostics_header(&["a".into(), "b".into()]);
        assert_eq!(h.split(',').count(), 1 + 2 * 5 + 7);
    }
}
