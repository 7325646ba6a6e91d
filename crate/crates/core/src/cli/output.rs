//! CSV and gnuplot emitters.

use std::io::Write;
use std::path::Path;

use crate::dynamics::Trajectory;
use crate::pulses::Direction;
use crate::sweep::SweepResult;

pub const TRAJECTORY_HEADER: [&str; 9] =
    ["t", "P1", "P2", "P3", "energy", "ergotropy", "power", "dark_fidelity", "norm_error"];
pub const DISCHARGE_COLUMN: &str = "discharge_power";
pub const SWEEP_HEADER: [&str; 7] = ["param", "value", "protocol", "C_max", "P_max", "C_final", "status"];

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> csv::Result<()> {
    let discharge = traj.config.direction == Direction::Discharge;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header: Vec<&str> = TRAJECTORY_HEADER.to_vec();
    if discharge {
        header.push(DISCHARGE_COLUMN);
    }
    w.write_record(&header)?;
    for s in &traj.samples {
        let mut row = vec![
            fmt_num(s.t),
            fmt_num(s.populations[0]),
            fmt_num(s.populations[1]),
            fmt_num(s.populations[2]),
            fmt_num(s.energy),
            fmt_num(s.ergotropy),
            fmt_num(s.power),
            fmt_num(s.dark_fidelity),
            fmt_num(s.norm_error),
        ];
        if discharge {
            row.push(fmt_num(s.discharge_power));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Failed rows keep their key columns, leave the numbers empty and carry the
/// error in `status`.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in &result.rows {
        let key = [result.parameter.name().to_string(), fmt_num(row.value), row.protocol.name().to_string()];
        let tail = match &row.outcome {
            Ok(m) => [fmt_num(m.c_max), fmt_num(m.p_max), fmt_num(m.c_final), "ok".to_string()],
            Err(e) => [String::new(), String::new(), String::new(), format!("failed: {e}")],
        };
        w.write_record(key.iter().chain(tail.iter()))?;
    }
    w.flush()?;
    Ok(())
}

/// Gnuplot script drawing ergotropy and power against time.
pub fn trajectory_plot_script(csv_name: &str, direction: Direction) -> String {
    let (power_col, power_label) = match direction {
        Direction::Charge => ("power", "P(t)"),
        Direction::Discharge => (DISCHARGE_COLUMN, "P_d(t)"),
    };
    let stem = csv_name.trim_end_matches(".csv");
    format!(
        r#"# gnuplot script generated for {csv_name}
set datafile separator ","
set terminal pngcairo size 900,700
set output "{stem}.png"
set multiplot layout 2,1
set xlabel "t"
set ylabel "C(t)"
plot "{csv_name}" using "t":"ergotropy" with lines lw 2 title "ergotropy"
set ylabel "{power_label}"
plot "{csv_name}" using "t":"{power_col}" with lines lw 2 title "{power_col}"
unset multiplot
"#
    )
}

/// Gnuplot script drawing C_max and P_max against the swept parameter, one
/// curve per protocol.
pub fn sweep_plot_script(csv_name: &str, param: &str) -> String {
    let stem = csv_name.trim_end_matches(".csv");
    let curve = |col: usize| {
        format!(
            r#""{csv_name}" using 2:(strcol(3) eq "cdstirap" && strcol(7) eq "ok" ? ${col} : 1/0) with linespoints lw 2 lc rgb "red" title "cdSTIRAP", \
     "{csv_name}" using 2:(strcol(3) eq "stirap" && strcol(7) eq "ok" ? ${col} : 1/0) with linespoints lw 2 dt 2 lc rgb "black" title "STIRAP""#
        )
    };
    format!(
        r#"# gnuplot script generated for {csv_name}
set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 900,700
set output "{stem}.png"
set multiplot layout 2,1
set xlabel "{param}"
set ylabel "C_max"
plot {c}
set ylabel "P_max"
plot {p}
unset multiplot
"#,
        c = curve(4),
        p = curve(5),
    )
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    std::fs::write(path, text)
}
