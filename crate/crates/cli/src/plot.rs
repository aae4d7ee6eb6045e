//! gnuplot scripts for the figure data.

use std::fmt::Write as _;

const PREAMBLE: &str = "set datafile separator ','\nset terminal pngcairo size 900,600\n";

fn quote(name: &str) -> String {
    format!("'{}'", name.replace('\'', "''"))
}

/// Heatmap of a long-format `x,t,F` file.
pub fn heatmap(data: &str, png: &str, xlabel: &str, title: &str) -> String {
    let mut s = String::from(PREAMBLE);
    writeln!(s, "set output {}", quote(png)).unwrap();
    writeln!(s, "set title {}", quote(title)).unwrap();
    writeln!(s, "set xlabel {}", quote(xlabel)).unwrap();
    s.push_str("set ylabel 't'\nset cblabel '|F(t)|'\nset cbrange [0:1]\nset palette rgbformulae 33,13,10\n");
    writeln!(s, "plot {} skip 1 using 1:2:3 with image notitle", quote(data)).unwrap();
    s
}

/// One line per `(file, x column, y column, label)`.
pub fn curves(series: &[(&str, usize, usize, String)], png: &str, title: &str) -> String {
    let mut s = String::from(PREAMBLE);
    writeln!(s, "set output {}", quote(png)).unwrap();
    writeln!(s, "set title {}", quote(title)).unwrap();
    s.push_str("set xlabel 't'\nset ylabel '|F(t)|'\nset yrange [0:1.05]\nset key outside right\n");
    let parts: Vec<String> = series
        .iter()
        .map(|(file, x, y, label)| format!("{} skip 1 using {x}:{y} with lines title {}", quote(file), quote(label)))
        .collect();
    writeln!(s, "plot {}", parts.join(", \\\n     ")).unwrap();
    s
}

/// File names referenced by a script, in order of appearance.
pub fn referenced_files(script: &str) -> Vec<String> {
    script
        .lines()
        .flat_map(|line| {
            let mut found = Vec::new();
            let mut rest = line;
            while let Some(start) = rest.find('\'') {
                let after = &rest[start + 1..];
                let Some(end) = after.find('\'') else { break };
                let word = &after[..end];
                if word.ends_with(".csv") {
                    found.push(word.to_string());
                }
                rest = &after[end + 1..];
            }
            found
        })
        .collect()
}
