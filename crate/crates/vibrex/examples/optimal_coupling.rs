//! Closed-form optimum of the transfer: the anchoring eps* that parks the
//! fast carrier on the slow envelope's first maximum, the predicted ceiling
//! G_M*, and the temperature scale T0 of its quadratic decay.
//!
//! Also classifies the beat ratio across the anchoring range, which is where
//! the destructive anchorings of the coupling sweep come from.

use vibrex::params::ModelParams;
use vibrex::threepath::{hybridize, resonance_condition, transfer_ceiling, ResonanceClass};

fn main() {
    println!("T (K)    eps*       n_match   G_M*      T0 (K)");
    for t in [50.0, 100.0, 150.0, 200.0, 250.0, 300.0] {
        let p = ModelParams {
            temperature: t,
            ..ModelParams::reference()
        };
        let d = p.derive().unwrap();
        let c = transfer_ceiling(&p, &d).unwrap();
        println!(
            "{t:5.0}    {:.5}    {:6.1}    {:.4}    {:6.0}",
            c.epsilon_star, c.n_match, c.g_m_star, c.t_zero_kelvin
        );
    }

    println!();
    println!("beat-ratio resonances at 300 K:");
    for i in 0..10 {
        let epsilon = 0.005 + 0.0025 * i as f64;
        let p = ModelParams {
            epsilon,
            ..ModelParams::reference()
        };
        let d = p.derive().unwrap();
        let alpha = hybridize(&p, &d).alpha;
        let label = match resonance_condition(alpha, 0.01) {
            ResonanceClass::Destructive { q } => format!("destructive ({}/{})", 2 * q - 1, 2 * q + 1),
            ResonanceClass::Constructive { q, p } => format!("constructive ({}/{})", q - p, q + p + 1),
            ResonanceClass::None => String::from("-"),
        };
        println!("  eps = {epsilon:.4}: alpha = {alpha:.4}  {label}");
    }
}
