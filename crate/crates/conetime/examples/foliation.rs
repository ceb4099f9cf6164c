//! Level sets of the cosmological time of a translated cone, written as grid CSVs
//! (with JSON sidecars) to a directory given on the command line.

use std::path::PathBuf;
use std::sync::Arc;

use conetime::cone::{support_of_translate, ConeSpec, Vec3};
use conetime::cosmology::Cosmology;
use conetime::io::write_grid;
use conetime::sphere::GaugeFunction;
use conetime::GridDomain;

fn main() -> conetime::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "foliation".into()));
    let cone = ConeSpec::minkowski(65)?;
    let apex = Vec3::new(0.2, -0.1, 0.0);
    let s = support_of_translate(cone.dual().clone(), &apex)?;
    let cosmo = Cosmology::new(s, GaugeFunction::minkowski(cone.dual().clone())?)?;
    let window = Arc::new(GridDomain::window(-2.0, 2.0, -2.0, 2.0, 41)?);

    for t in [0.5, 1.0, 2.0, 4.0] {
        let level = cosmo.level_set(t, window.clone())?;
        let lowest = level.values().iter().copied().fold(f64::INFINITY, f64::min);
        let path = out.join(format!("level_t{t}.csv"));
        write_grid(&path, &level)?;
        // for a translated cone the lowest point sits right above the apex
        println!("t = {t}: lowest height {lowest:.4} (exact {:.4}) -> {}", apex.z + t, path.display());
    }
    Ok(())
}
