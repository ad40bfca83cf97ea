//! The six-metric quality report, with and without a reference.

use panfuse::metrics::{evaluate, EvaluationInputs};
use panfuse::operators::{nearest_upsample, pan_mix};
use panfuse::sim::*;
use panfuse::{Psf, SensorModel};

fn main() -> panfuse::Result<()> {
    let reference = piecewise_constant_scene(&SceneSpec {
        width: 32,
        height: 32,
        bands: 8,
        shapes: 6,
        seed: 11,
    })?;
    let q = 2;
    let model = SensorModel::uniform(q, Psf::box_average(q), 8, 0.0, 0.0)?;
    let x = blur_and_decimate(&reference, &model)?;
    let p = pan_mix(&reference, &model.g)?;
    let estimate = nearest_upsample(&x, q);

    let full = evaluate(EvaluationInputs {
        estimate: &estimate,
        reference: Some(&reference),
        x: Some(&x),
        p: Some(&p),
        model: Some(&model),
        q,
    })?;
    println!("nearest-neighbour estimate, all inputs:\n{}", full.to_text());

    let blind = evaluate(EvaluationInputs {
        estimate: &estimate,
        reference: None,
        x: Some(&x),
        p: Some(&p),
        model: Some(&model),
        q,
    })?;
    println!("without a reference:\n{}", blind.to_text());

    let perfect = evaluate(EvaluationInputs {
        estimate: &reference,
        reference: Some(&reference),
        x: None,
        p: None,
        model: None,
        q,
    })?;
    println!("reference against itself (json):\n{}", perfect.to_json());
    Ok(())
}
