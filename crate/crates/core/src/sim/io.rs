//! CSV and JSON export of traces, switch logs and metrics, with matching readers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::equilibrium::Region;
use crate::error::{Error, Result};
use crate::model::{InputVec, OutputVec, StateVec};
use crate::sim::run::{SimRecord, SimTrace, SwitchEvent};

pub const TRACE_HEADER: &str = "t,V,omega,xt,vt,theta,mg,p,lambda,mode,p_ref";
pub const SWITCH_HEADER: &str =
    "t,from_mode,to_mode,theta_prev,mg_prev,theta_cmd,mg_cmd,theta_applied,mg_applied,jump,lsq_cost,zero_state_cost,kkt_gradient,fallback";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct TraceRow {
    t: f64,
    #[serde(rename = "V")]
    v: f64,
    omega: f64,
    xt: f64,
    vt: f64,
    theta: f64,
    mg: f64,
    p: f64,
    lambda: f64,
    mode: u8,
    p_ref: f64,
}

impl From<&SimRecord> for TraceRow {
    fn from(r: &SimRecord) -> Self {
        Self {
            t: r.t,
            v: r.v,
            omega: r.x.omega,
            xt: r.x.xt,
            vt: r.x.vt,
            theta: r.u.theta,
            mg: r.u.mg,
            p: r.y.p,
            lambda: r.y.lambda,
            mode: r.mode.into(),
            p_ref: r.p_ref,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SwitchRow {
    t: f64,
    from_mode: u8,
    to_mode: u8,
    theta_prev: f64,
    mg_prev: f64,
    theta_cmd: f64,
    mg_cmd: f64,
    theta_applied: f64,
    mg_applied: f64,
    jump: f64,
    lsq_cost: f64,
    zero_state_cost: f64,
    kkt_gradient: f64,
    fallback: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(path, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_rows<T: Serialize>(path: &Path, header: &str, rows: impl Iterator<Item = T>) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{header}").map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, header: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e))?;
    let found = r.headers().map_err(|e| Error::io(path, e))?.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(Error::io(path, format!("unexpected header '{found}'")));
    }
    r.deserialize().map(|row| row.map_err(|e| Error::io(path, e))).collect()
}

pub fn write_trace(path: &Path, trace: &SimTrace) -> Result<()> {
    write_rows(path, TRACE_HEADER, trace.records.iter().map(TraceRow::from))
}

/// Reads a trace CSV. The tower velocity and rotor speed are restored; the
/// tip-speed ratio and power outputs come from the file.
pub fn read_trace(path: &Path) -> Result<Vec<SimRecord>> {
    let rows: Vec<TraceRow> = read_rows(path, TRACE_HEADER)?;
    rows.into_iter()
        .map(|r| {
            Ok(SimRecord {
                t: r.t,
                v: r.v,
                x: StateVec { omega: r.omega, xt: r.xt, vt: r.vt },
                u: InputVec { theta: r.theta, mg: r.mg },
                y: OutputVec { omega: r.omega, lambda: r.lambda, p: r.p, xt: r.xt },
                mode: Region::try_from(r.mode).map_err(|e| Error::io(path, e))?,
                p_ref: r.p_ref,
            })
        })
        .collect()
}

pub fn write_switches(path: &Path, switches: &[SwitchEvent]) -> Result<()> {
    write_rows(
        path,
        SWITCH_HEADER,
        switches.iter().map(|s| SwitchRow {
            t: s.t,
            from_mode: s.from.into(),
            to_mode: s.to.into(),
            theta_prev: s.u_prev.theta,
            mg_prev: s.u_prev.mg,
            theta_cmd: s.u_cmd.theta,
            mg_cmd: s.u_cmd.mg,
            theta_applied: s.u_applied.theta,
            mg_applied: s.u_applied.mg,
            jump: s.jump,
            lsq_cost: s.lsq_cost,
            zero_state_cost: s.zero_state_cost,
            kkt_gradient: s.kkt_gradient,
            fallback: s.fallback,
        }),
    )
}

pub fn read_switches(path: &Path) -> Result<Vec<SwitchEvent>> {
    let rows: Vec<SwitchRow> = read_rows(path, SWITCH_HEADER)?;
    rows.into_iter()
        .map(|s| {
            let region = |m: u8| Region::try_from(m).map_err(|e| Error::io(path, e));
            Ok(SwitchEvent {
                t: s.t,
                from: region(s.from_mode)?,
                to: region(s.to_mode)?,
                u_prev: InputVec { theta: s.theta_prev, mg: s.mg_prev },
                u_cmd: InputVec { theta: s.theta_cmd, mg: s.mg_cmd },
                u_applied: InputVec { theta: s.theta_applied, mg: s.mg_applied },
                jump: s.jump,
                lsq_cost: s.lsq_cost,
                zero_state_cost: s.zero_state_cost,
                kkt_gradient: s.kkt_gradient,
                fallback: s.fallback,
            })
        })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::io(path, e))?;
    writeln!(out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::io(path, e))
}
