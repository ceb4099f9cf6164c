//! Bulging and bending the genus-two fixture along its separating curve.

use std::sync::Arc;

use conetime::cone::ConeSpec;
use conetime::deform::{bend_translation, bulge, genus_two};

fn main() -> conetime::Result<()> {
    let g = genus_two();
    let rep = Arc::new(g.rep.clone());
    let split = &g.splitting;
    println!("fixed vector of the separating curve: {:?}", split.x.as_slice());

    for s in [0.0, 0.2, 0.5] {
        let bulged = bulge(&g.rep, split, s)?;
        let a = split.bulge_matrix(s);
        println!(
            "bulge s = {s}: det A = {:.12}, still preserves the round cone: {}",
            a.determinant(),
            bulged.preserves_cone(&ConeSpec::minkowski(33)?, 64, 1e-9)
        );
    }

    let bent = bend_translation(rep.clone(), split, 0.3)?;
    for (label, t) in rep.labels().iter().zip(bent.values()) {
        println!("tau({label}) = ({:+.5}, {:+.5}, {:+.5})", t.x, t.y, t.z);
    }
    for w in &split.lambda {
        println!("tau({}) = {:.2e} on the separating curve", rep.format_word(w), bent.extend(w).norm());
    }
    println!("relator defect {:.2e}", bent.relator_defect());
    Ok(())
}
