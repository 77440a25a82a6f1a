use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::OutputKind;
use super::run::ScenarioResult;
use crate::error::{Error, Result};
use crate::poling::target_amplitude;

fn write(dir: &Path, name: String, body: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| Error::config("out", format!("{}: {e}", path.display())))?;
    written.push(path);
    Ok(())
}

fn complex_pairs(v: &[crate::c64]) -> Vec<[f64; 2]> {
    v.iter().map(|x| [x.re, x.im]).collect()
}

/// Write the summary and every requested output; returns the paths written.
pub fn write_outputs(res: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::config("out", format!("{}: {e}", dir.display())))?;
    let prefix = format!("{}-{}", res.summary.name, res.summary.config_hash);
    let mut written = Vec::new();
    let pts = &res.summary.points;
    let json_text = |v: &serde_json::Value| serde_json::to_string_pretty(v).expect("json");

    write(
        dir,
        format!("{prefix}-summary.json"),
        &serde_json::to_string_pretty(&res.summary)?,
        &mut written,
    )?;

    let mut kinds = res.config.outputs.clone();
    kinds.dedup();
    for kind in kinds {
        match kind {
            OutputKind::KVsGain => {
                let mut s = String::from("target,pump_photons,mean_signal_photons,schmidt_number,r1,r2,r3,r4,r5\n");
                for p in pts {
                    let mut r: Vec<String> = p.r.iter().map(f64::to_string).collect();
                    r.resize(5, String::new());
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        p.target,
                        p.pump_photons,
                        p.mean_signal_photons,
                        p.schmidt_number,
                        r.join(",")
                    );
                }
                write(dir, format!("{prefix}-k_vs_gain.csv"), &s, &mut written)?;
            }
            OutputKind::FidelityVsGain => {
                let mut s = String::from("mean_signal_photons,fidelity,filtered_fidelity\n");
                for p in pts {
                    let f = p.filtered.as_ref().map(|f| f.fidelity.to_string()).unwrap_or_default();
                    let _ = writeln!(s, "{},{},{}", p.mean_signal_photons, p.fidelity, f);
                }
                write(dir, format!("{prefix}-fidelity_vs_gain.csv"), &s, &mut written)?;
            }
            OutputKind::PurityVsGain => {
                let mut s = String::from("mean_signal_photons,purity,filtered_schmidt_number\n");
                for p in pts {
                    let (pur, k) = p
                        .filtered
                        .as_ref()
                        .map_or((1.0, p.schmidt_number), |f| (f.purity, f.schmidt_number));
                    let _ = writeln!(s, "{},{},{}", p.mean_signal_photons, pur, k);
                }
                write(dir, format!("{prefix}-purity_vs_gain.csv"), &s, &mut written)?;
            }
            OutputKind::FidelityMatrix => {
                let v: Vec<_> = pts
                    .iter()
                    .filter_map(|p| {
                        let m = p.filtered.as_ref()?.fidelity_matrix.as_ref()?;
                        Some(json!({"mean_signal_photons": p.mean_signal_photons, "matrix": m}))
                    })
                    .collect();
                write(
                    dir,
                    format!("{prefix}-fidelity_matrix.json"),
                    &json_text(&json!(v)),
                    &mut written,
                )?;
            }
            OutputKind::Jsa => {
                let v: Vec<_> = res
                    .jsa
                    .iter()
                    .map(|(ns, j)| {
                        let n = j.axis.len();
                        let abs: Vec<Vec<f64>> = (0..n)
                            .map(|a| (0..n).map(|b| j.values[(a, b)].norm()).collect())
                            .collect();
                        json!({"mean_signal_photons": ns, "axis": j.axis, "abs": abs})
                    })
                    .collect();
                write(dir, format!("{prefix}-jsa.json"), &json_text(&json!(v)), &mut written)?;
            }
            OutputKind::SchmidtModes => {
                let omega = res.source.grid.points();
                let v: Vec<_> = res
                    .sweep
                    .states
                    .iter()
                    .map(|s| {
                        let d = &s.decomposition;
                        let k = d.len().min(3);
                        json!({
                            "mean_signal_photons": s.mean_signal_photons,
                            "r": d.r[..k],
                            "signal": d.rho_s[..k].iter().map(|m| complex_pairs(m)).collect::<Vec<_>>(),
                            "idler": d.rho_i[..k].iter().map(|m| complex_pairs(m)).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                write(
                    dir,
                    format!("{prefix}-schmidt_modes.json"),
                    &json_text(&json!({"omega": omega, "points": v})),
                    &mut written,
                )?;
            }
            OutputKind::PolingAmplitude => {
                let profile = &res.source.profile;
                let cum = profile.cumulative_amplitude();
                let total = res.source.target.as_ref().map_or(profile.length(), |t| t.total_area());
                let mut s = String::from("z,amplitude,target\n");
                for (i, c) in cum.iter().enumerate() {
                    let z = i as f64 * profile.domain_length;
                    let t = match &res.source.target {
                        Some(t) => target_amplitude(t, z)?.to_string(),
                        None => String::new(),
                    };
                    let _ = writeln!(s, "{z},{},{t}", c / total);
                }
                write(dir, format!("{prefix}-poling_amplitude.csv"), &s, &mut written)?;
            }
        }
    }
    if let Some(fs) = &res.summary.filter_sweep {
        let mut s = String::from("half_width,bare_mean_signal_photons,fidelity,purity\n");
        for (w, (fr, pr)) in fs.half_widths.iter().zip(fs.fidelity.iter().zip(&fs.purity)) {
            for (g, (f, p)) in fs.bare_mean_signal_photons.iter().zip(fr.iter().zip(pr)) {
                let _ = writeln!(s, "{w},{g},{f},{p}");
            }
        }
        write(dir, format!("{prefix}-filter_sweep.csv"), &s, &mut written)?;
    }
    Ok(written)
}
