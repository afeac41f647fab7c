//! Sweep-grid flag syntax: `start:stop[:step]` (inclusive of `stop` when the
//! step lands on it), comma-separated lists, or a single value.

pub fn parse_grid(text: &str) -> Result<Vec<usize>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty grid".into());
    }
    if text.contains(',') {
        return text.split(',').map(parse_count).collect();
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![parse_count(single)?]),
        [start, stop] => span(parse_count(start)?, parse_count(stop)?, 1),
        [start, stop, step] => span(parse_count(start)?, parse_count(stop)?, parse_count(step)?),
        _ => Err(format!("`{text}` is not start:stop[:step]")),
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{}` is not a nonnegative integer", s.trim()))
}

fn span(start: usize, stop: usize, step: usize) -> Result<Vec<usize>, String> {
    if step == 0 {
        return Err("step must be positive".into());
    }
    if stop < start {
        return Err(format!("stop {stop} is below start {start}"));
    }
    Ok((start..=stop).step_by(step).collect())
}
