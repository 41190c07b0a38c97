use crate::io::SERIES_COLUMNS;

/// Gnuplot script drawing the series columns of `csv` in six panels.
pub fn gnuplot_script(csv: &str) -> String {
    let panels: [(&str, &[&str], bool); 6] = [
        ("ADM mass", &["mass"], false),
        ("mass rate flux", &["mass_rate"], false),
        ("volume ratio", &["mu"], false),
        ("decay exponents", &["riem_exp", "scalar_exp"], false),
        ("norms", &["l1R", "wkq", "mtau"], false),
        ("residuals", &["res_scee", "res_vol", "res_totR", "res_domd"], true),
    ];
    let mut s = String::new();
    s.push_str("# columns: ");
    s.push_str(&SERIES_COLUMNS.join(","));
    s.push('\n');
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set terminal pngcairo size 1400,900\n");
    s.push_str("set output 'series.png'\n");
    s.push_str("set multiplot layout 2,3\n");
    s.push_str("set xlabel 't'\n");
    for (title, cols, log) in panels {
        s.push_str(&format!("set title '{title}'\n"));
        s.push_str(if log { "set logscale y\n" } else { "unset logscale y\n" });
        let plots: Vec<String> = cols
            .iter()
            .map(|c| {
                let y = if log { format!("(abs(column('{c}')))") } else { format!("'{c}'") };
                format!("'{csv}' using 't':{y} with linespoints title '{c}'")
            })
            .collect();
        s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    }
    s.push_str("unset multiplot\n");
    s
}
