//! Grid expressions: `a:b:step` (inclusive), `x,y,z`, or a single number.

/// Grid points are snapped to 12 decimals so `0.30 + 7*0.01` prints as `0.37`.
const SNAP: f64 = 1e12;

pub fn parse(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty grid".into());
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range {text:?} must look like start:stop:step"));
        }
        let [a, b, step] = [number(parts[0])?, number(parts[1])?, number(parts[2])?];
        if !(step > 0.0) || b < a {
            return Err(format!("range {text:?} needs start <= stop and step > 0"));
        }
        let span = (b - a) / step;
        let mut n = span.round() as usize;
        // floor unless the rounded count lands on the endpoint
        if n as f64 - span > 1e-9 {
            n = span.floor() as usize;
        }
        Ok((0..=n).map(|i| snap(a + i as f64 * step)).collect())
    } else {
        text.split(',').map(number).collect()
    }
}

fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn snap(x: f64) -> f64 {
    let y = (x * SNAP).round() / SNAP;
    // leave very small magnitudes alone
    if x.abs() < 1e-3 {
        x
    } else {
        y
    }
}

/// `name=a:b:step`.
pub fn parse_named(text: &str) -> Result<(String, Vec<f64>), String> {
    let (name, grid) = text.split_once('=').ok_or_else(|| format!("{text:?} must look like name=start:stop:step"))?;
    Ok((name.trim().to_string(), parse(grid)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_ranges() {
        let g = parse("0.30:0.45:0.01").unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g[7], 0.37);
        assert_eq!(*g.last().unwrap(), 0.45);
        assert_eq!(parse("0:1:0.3").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
        assert_eq!(parse("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse("3e-1, 3e-9").unwrap(), vec![0.3, 3e-9]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("1:0:0.1").is_err());
        assert!(parse("0:1:0").is_err());
        assert!(parse("a,b").is_err());
        assert!(parse_named("0:1:0.1").is_err());
        assert_eq!(parse_named("delta=0.3:0.4:0.1").unwrap().0, "delta");
    }
}
