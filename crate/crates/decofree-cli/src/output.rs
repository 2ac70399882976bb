//! CSV/JSON emission. All files are written via a temp file in the target
//! directory and renamed into place.

use std::io;
use std::path::Path;

use decofree::analysis::{ScanResult, Trajectory};
use decofree::operator::Level;

pub const CSV_HEADER: &str = "time,fidelity,trace_error,purity,pop_e,pop_g,mean_photon";

/// 17 significant digits, enough to round-trip any f64.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.times.len() * 160);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (i, t) in traj.times.iter().enumerate() {
        let rho = &traj.states[i];
        let pop_e = rho.get(Level::E.index(), Level::E.index()).re;
        let pop_g = rho.get(Level::G.index(), Level::G.index()).re;
        let row = [
            *t,
            traj.fidelities[i],
            traj.trace_errors[i],
            traj.purities[i],
            pop_e,
            pop_g,
            traj.mean_photons[i],
        ];
        out.push_str(&row.map(fmt17).join(","));
        out.push('\n');
    }
    out
}

pub fn scan_csv(scan: &ScanResult) -> String {
    let mut out = String::from("value,steady_fidelity,steady_deviation\n");
    for (i, v) in scan.axis.iter().enumerate() {
        out.push_str(
            &[*v, scan.steady_fidelities[i], scan.steady_deviations[i]].map(fmt17).join(","),
        );
        out.push('\n');
    }
    out
}
