use std::fmt::Write as _;

use super::experiments::ConvergenceReport;
use super::regularize::RegularizationReport;

/// `<model>_<f>_<metric>.csv` with every character outside `[A-Za-z0-9_-]`
/// replaced by `_`.
pub fn report_file_name(model: &str, function: &str, metric: &str) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect()
    };
    format!("{}_{}_{}.csv", clean(model), clean(function), clean(metric))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `n,eps_global,eps_cluster,func_error_norm,probe_err_0..,c_f,bound_rhs,level2_ok`,
/// plus a trailing `delta` column when any row carries one.
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let probes = report.rows.first().map_or(0, |r| r.probe_errors.len());
    let with_delta = report.rows.iter().any(|r| r.delta.is_some());
    let mut s = String::from("n,eps_global,eps_cluster,func_error_norm");
    for k in 0..probes {
        write!(s, ",probe_err_{k}").unwrap();
    }
    s.push_str(",c_f,bound_rhs,level2_ok");
    if with_delta {
        s.push_str(",delta");
    }
    s.push('\n');
    for r in &report.rows {
        write!(
            s,
            "{},{},{},{}",
            r.n,
            num(r.eps_global),
            num(r.eps_cluster),
            num(r.func_error_norm)
        )
        .unwrap();
        for &e in &r.probe_errors {
            write!(s, ",{}", num(e)).unwrap();
        }
        write!(s, ",{},{},{}", num(report.constant.c_f), num(r.bound_rhs), r.level2_ok).unwrap();
        if with_delta {
            write!(s, ",{}", r.delta.map(num).unwrap_or_default()).unwrap();
        }
        s.push('\n');
    }
    s
}

/// `eps,norm_error,hypothesis,resolvent_norm,probe_err_k..,bound_term_k..,bound_ok,status`.
pub fn regularization_csv(report: &RegularizationReport) -> String {
    let probes = report.rows.iter().map(|r| r.bound_terms.len()).max().unwrap_or(0);
    let mut s = String::from("eps,norm_error,hypothesis,resolvent_norm");
    for k in 0..probes {
        write!(s, ",probe_err_{k}").unwrap();
    }
    for k in 0..probes {
        write!(s, ",bound_term_{k}").unwrap();
    }
    s.push_str(",bound_ok,status\n");
    for r in &report.rows {
        write!(
            s,
            "{},{},{},{}",
            num(r.eps),
            num(r.norm_error),
            num(r.hypothesis),
            num(r.resolvent_norm)
        )
        .unwrap();
        for k in 0..probes {
            write!(s, ",{}", r.probe_errors.get(k).map(|&e| num(e)).unwrap_or_default()).unwrap();
        }
        for &b in &r.bound_terms {
            write!(s, ",{}", num(b)).unwrap();
        }
        let status = r.status.as_deref().unwrap_or("ok").replace([',', '\n'], ";");
        writeln!(s, ",{},{}", r.bound_ok, status).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{build_model, level_experiment, LevelSetup, ModelKind};
    use crate::funcspace::AnalyticFunction;
    use crate::numerics::C64;
    use crate::spectra::Contour;

    #[test]
    fn file_names_are_sanitized() {
        assert_eq!(
            report_file_name("harmonic", "exp(-1*z1)", "level"),
            "harmonic_exp_-1_z1__level.csv"
        );
    }

    #[test]
    fn convergence_columns() {
        let model = build_model(ModelKind::Harmonic, 16, 2).unwrap();
        let setup = LevelSetup::new(
            C64::new(-1.0, 0.0),
            Contour::circle(C64::new(3.0, 0.0), 2.5).unwrap(),
            vec![3, 4],
        );
        let f = AnalyticFunction::exp_affine(vec![C64::new(-1.0, 0.0)], C64::new(0.0, 0.0));
        let rep = level_experiment(&model, &f, &setup).unwrap();
        let csv = convergence_csv(&rep);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "n,eps_global,eps_cluster,func_error_norm,probe_err_0,probe_err_1,probe_err_2,c_f,bound_rhs,level2_ok"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("3,") && lines[1].ends_with(",true"));
        assert_eq!(lines[1].split(',').count(), 10);
    }
}
