use scenemt_core::masks::Mask;
use scenemt_core::{Error, Result};

/// Shortest decimal that survives a round trip through 9 significant digits.
fn nine_digits(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// `M <rows> <cols> <family>` followed by one line per row.
pub fn format_mask(mask: &Mask, family: &str) -> String {
    let mut out = format!("M {} {} {family}\n", mask.rows(), mask.cols());
    for i in 0..mask.rows() {
        let row: Vec<String> = mask.row(i).iter().map(|&x| nine_digits(x)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses every mask in `text`, returning each with its family name.
pub fn parse_masks(text: &str) -> Result<Vec<(Mask, String)>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < lines.len() {
        let (ln, header) = lines[k];
        let f: Vec<&str> = header.split_whitespace().collect();
        let err = |line, msg: String| Error::Parse { line, msg };
        if f.len() != 4 || f[0] != "M" {
            return Err(err(ln, "expected `M <rows> <cols> <family>`".into()));
        }
        let rows: usize = f[1]
            .parse()
            .map_err(|_| err(ln, format!("bad row count `{}`", f[1])))?;
        let cols: usize = f[2]
            .parse()
            .map_err(|_| err(ln, format!("bad column count `{}`", f[2])))?;
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let &(ln, row) = lines
                .get(k + 1 + r)
                .ok_or_else(|| err(ln, format!("mask ends after {r} of {rows} rows")))?;
            let before = values.len();
            for tok in row.split_whitespace() {
                let v = tok
                    .parse::<f64>()
                    .map_err(|_| err(ln, format!("bad value `{tok}`")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(err(ln, format!("value `{tok}` outside [0, 1]")));
                }
                values.push(v);
            }
            if values.len() - before != cols {
                return Err(err(
                    ln,
                    format!("expected {cols} values, found {}", values.len() - before),
                ));
            }
        }
        let mask = Mask::new(rows, cols, values).map_err(|e| err(ln, e.to_string()))?;
        out.push((mask, f[3].to_string()));
        k += 1 + rows;
    }
    Ok(out)
}

/// Exactly one mask.
pub fn parse_mask(text: &str) -> Result<(Mask, String)> {
    let mut all = parse_masks(text)?;
    if all.len() != 1 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected one mask, found {}", all.len()),
        });
    }
    Ok(all.remove(0))
}
