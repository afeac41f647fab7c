use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use logshrink::experiments::MetricsRow;

/// Renders rows as CSV. `coord_column` names the sweep coordinate column.
pub fn render_csv(coord_column: &str, rows: &[MetricsRow]) -> String {
    let mut out = format!("experiment,algorithm,{coord_column},trials,value_kind,value\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.16e}\n",
            row.experiment.as_str(),
            row.algorithm_label(),
            row.sweep_coord,
            row.trials,
            row.value_kind.as_str(),
            row.value
        ));
    }
    out
}

/// Writes `contents` to `dir/name` through a temporary sibling file, so a
/// failed run never leaves a partial file behind.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
        fs::rename(&tmp, &target)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map(|_| target)
}
