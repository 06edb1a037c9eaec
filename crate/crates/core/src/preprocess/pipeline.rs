use super::{normalize, resize_bilinear, NormalizeSpec, PreprocessError, ResizeSpec};
use crate::raster::RasterImage;

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Resize(ResizeSpec),
    Normalize(NormalizeSpec),
}

impl Step {
    pub fn apply(&self, image: &RasterImage) -> Result<RasterImage, PreprocessError> {
        match self {
            Step::Resize(spec) => resize_bilinear(image, *spec),
            Step::Normalize(spec) => normalize(image, spec),
        }
    }
}

/// Ordered preprocessing steps. The empty pipeline is the identity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Pipeline {
    pub steps: Vec<Step>,
}

impl Pipeline {
    pub fn new(steps: Vec<Step>) -> Self {
        Self { steps }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn then(mut self, step: Step) -> Self {
        self.steps.push(step);
        self
    }

    pub fn concat(&self, other: &Pipeline) -> Pipeline {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Pipeline { steps }
    }

    /// Output spatial size for an input of `(h, w)`.
    pub fn output_size(&self, mut hw: (usize, usize)) -> (usize, usize) {
        for step in &self.steps {
            if let Step::Resize(spec) = step {
                hw = (spec.out_height, spec.out_width);
            }
        }
        hw
    }
}

pub fn apply_pipeline(image: &RasterImage, pipeline: &Pipeline) -> Result<RasterImage, PreprocessError> {
    let mut current = image.clone();
    for (index, step) in pipeline.steps.iter().enumerate() {
        current = step.apply(&current).map_err(|e| PreprocessError::Step {
            index,
            source: Box::new(e),
        })?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::MinMaxScope;
    use proptest::prelude::*;

    fn tile(c: usize, h: usize, w: usize) -> RasterImage {
        let data = (0..c * h * w)
            .map(|i| 500.0 + ((i * 7919) % 3000) as f32)
            .collect();
        RasterImage::new(c, h, w, data).unwrap()
    }

    #[test]
    fn empty_pipeline_is_identity() {
        let img = tile(3, 4, 4);
        assert_eq!(apply_pipeline(&img, &Pipeline::identity()).unwrap(), img);
    }

    #[test]
    fn reflectance_then_resize_on_eurosat_shape() {
        let img = tile(13, 64, 64);
        let p = Pipeline::identity()
            .then(Step::Normalize(NormalizeSpec::reflectance()))
            .then(Step::Resize(ResizeSpec::square(224).unwrap()));
        let out = apply_pipeline(&img, &p).unwrap();
        assert_eq!((out.channels(), out.height(), out.width()), (13, 224, 224));
        assert!(out.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(p.output_size((64, 64)), (224, 224));
    }

    #[test]
    fn resize_at_fixed_size_is_idempotent() {
        let img = tile(2, 10, 12);
        let r = Step::Resize(ResizeSpec::square(224).unwrap());
        let once = apply_pipeline(&img, &Pipeline::new(vec![r.clone()])).unwrap();
        let twice = apply_pipeline(&img, &Pipeline::new(vec![r.clone(), r])).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn step_errors_carry_index() {
        let img = tile(2, 4, 4);
        let p = Pipeline::new(vec![
            Step::Normalize(NormalizeSpec::reflectance()),
            Step::Normalize(NormalizeSpec::imagenet()),
        ]);
        match apply_pipeline(&img, &p) {
            Err(PreprocessError::Step { index: 1, source }) => {
                assert!(matches!(*source, PreprocessError::ChannelCountMismatch { .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn step_strategy() -> impl Strategy<Value = Step> {
        prop_oneof![
            (1usize..12, 1usize..12).prop_map(|(h, w)| Step::Resize(ResizeSpec::new(h, w).unwrap())),
            (1f32..5000.0).prop_map(|d| Step::Normalize(NormalizeSpec::Reflectance { divisor: d })),
            Just(Step::Normalize(NormalizeSpec::MinMax(MinMaxScope::PerImage))),
            Just(Step::Normalize(NormalizeSpec::percentile_default())),
        ]
    }

    proptest! {
        #[test]
        fn concatenation_is_associative(
            a in proptest::collection::vec(step_strategy(), 0..4),
            b in proptest::collection::vec(step_strategy(), 0..4),
        ) {
            let img = tile(2, 5, 7);
            let (p1, p2) = (Pipeline::new(a), Pipeline::new(b));
            let staged = apply_pipeline(&apply_pipeline(&img, &p1).unwrap(), &p2).unwrap();
            let joined = apply_pipeline(&img, &p1.concat(&p2)).unwrap();
            prop_assert_eq!(staged, joined);
        }
    }
}
