//! LIBSVM parsing, min-max scaling, and the AUC saddle problem built on top.

use saddle_newton::problems::{make_auc_problem, parse_libsvm_str, scale_features, write_libsvm};
use saddle_newton::saddle::SaddleProblem;

const SAMPLE: &str = "\
+1 1:0.5 3:2 7:1
-1 2:1.5 3:1
-1 1:3 5:0.25
+1 4:1 7:2 # trailing comment
-1 2:0.5 6:1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let raw = parse_libsvm_str(SAMPLE, "sample")?;
    println!("{} rows, {} features, {:.0}% positive", raw.len(), raw.num_features, 100.0 * raw.positive_fraction());

    let (scaled, meta) = scale_features(&raw)?;
    for (row, label) in scaled.rows.iter().zip(&scaled.labels) {
        println!("{label:+} {:?}", row.indices.iter().zip(&row.values).collect::<Vec<_>>());
    }
    println!("p_hat = {}", meta.p_hat);

    let dir = std::env::temp_dir().join("saddle_newton_libsvm_example");
    std::fs::create_dir_all(&dir)?;
    write_libsvm(&scaled, dir.join("sample.scaled"), Some(&meta))?;
    println!("wrote {}", dir.join("sample.scaled").display());

    let auc = make_auc_problem(&scaled, 1.0 / scaled.len() as f64)?;
    let (m, n) = auc.dims();
    println!("AUC problem: {m} primal + {n} dual coordinates, f(0) = {}", auc.value(&vec![0.0; m + n]));
    Ok(())
}
