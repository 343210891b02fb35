use fanopair::dynamics::Model;
use fanopair::entanglement::negativity_trace;
use fanopair::params::Atom;
use fanopair::presets::CaptionSet;
use fanopair::smallmat::cr;
use fanopair::spectra::*;

fn main() {
    // interpretation D: pump scale fixed by the uncoupled (Coulomb-only)
    // normalization; dipole-dipole coupling added on top
    let mut raw = CaptionSet::base_comparable().raw().unwrap();
    let j = cr(1.0 / std::f64::consts::PI.sqrt());
    raw.j_a = j;
    raw.j_b = j;
    let m = Model::new(raw).unwrap();
    let g = EnergyGrid::preset_for_model(&m, 513).unwrap();
    let joint = sample_joint(&m, &g, true);
    let n = negativity_trace(&joint).unwrap().value;
    let fine = EnergyGrid::symmetric(1.0, 24.0, 16385).unwrap();
    let dip0 = marginal_at(&m, &fine, Atom::A, 0.0);
    let dipm1 = marginal_at(&m, &fine, Atom::A, -1.0);
    let feats = find_features_refined(&m, &EnergyGrid::symmetric(1.0, 24.0, 4097).unwrap(), Atom::A);
    let peak = feats.iter().filter(|f| f.kind == FeatureKind::Peak).map(|f| f.value).fold(0.0f64, f64::max);
    println!("interp D (fixed uncoupled pump): N = {n:.4}");
    println!("  ratio at E=0:  {:.4e}", dip0 / peak);
    println!("  ratio at E=-1: {:.4e}", dipm1 / peak);
    println!("  analytic norm = {:?}", m.norm_analytic());
}
