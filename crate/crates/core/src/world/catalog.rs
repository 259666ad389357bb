use serde::{Deserialize, Serialize};

use super::Dynamics;

/// Where instances of a class may be placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Standing on the floor anywhere in the room.
    Floor,
    /// Standing on the floor with its back against a wall.
    AgainstWall,
    /// Mounted on a wall at a fixed height.
    Wall,
    /// Resting on top of a supporter.
    Surface,
    /// Small item: on a supporter, inside a container, or on the floor.
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub label: String,
    pub dynamics: Dynamics,
    pub half_extents: [f64; 3],
    pub placement: Placement,
    /// Other objects may rest on its top face. Only static classes qualify.
    #[serde(default)]
    pub supporter: bool,
    /// Small items may be placed inside it. Only static classes qualify.
    #[serde(default)]
    pub container: bool,
}

impl ClassSpec {
    fn new(label: &str, dynamics: Dynamics, half_extents: [f64; 3], placement: Placement) -> Self {
        Self {
            label: label.to_string(),
            dynamics,
            half_extents,
            placement,
            supporter: false,
            container: false,
        }
    }

    fn supporter(mut self) -> Self {
        self.supporter = true;
        self
    }

    fn container(mut self) -> Self {
        self.container = true;
        self
    }
}

/// Twenty household classes: 8 static, 6 low-dynamic, 6 high-dynamic.
pub fn default_catalog() -> Vec<ClassSpec> {
    use Dynamics::*;
    use Placement::*;
    vec![
        ClassSpec::new("counter", Static, [0.60, 0.30, 0.45], AgainstWall).supporter(),
        ClassSpec::new("cabinet", Static, [0.40, 0.25, 0.40], AgainstWall).supporter(),
        ClassSpec::new("table", Static, [0.50, 0.40, 0.38], Floor).supporter(),
        ClassSpec::new("fridge", Static, [0.35, 0.35, 0.90], AgainstWall),
        ClassSpec::new("shelf", Static, [0.45, 0.18, 0.80], AgainstWall).container(),
        ClassSpec::new("window", Static, [0.50, 0.03, 0.40], Wall),
        ClassSpec::new("painting", Static, [0.35, 0.02, 0.25], Wall),
        ClassSpec::new("clock", Static, [0.15, 0.03, 0.15], Wall),
        ClassSpec::new("coffee_machine", LowDynamic, [0.12, 0.10, 0.15], Surface),
        ClassSpec::new("toaster", LowDynamic, [0.13, 0.08, 0.10], Surface),
        ClassSpec::new("microwave", LowDynamic, [0.25, 0.18, 0.15], Surface),
        ClassSpec::new("television", LowDynamic, [0.35, 0.05, 0.22], Surface),
        ClassSpec::new("laptop", LowDynamic, [0.17, 0.12, 0.08], Surface),
        ClassSpec::new("floor_lamp", LowDynamic, [0.15, 0.15, 0.60], Floor),
        ClassSpec::new("chair", HighDynamic, [0.22, 0.22, 0.45], Floor),
        ClassSpec::new("pillow", HighDynamic, [0.20, 0.20, 0.08], Floor),
        ClassSpec::new("mug", HighDynamic, [0.05, 0.05, 0.06], Small),
        ClassSpec::new("book", HighDynamic, [0.10, 0.07, 0.03], Small),
        ClassSpec::new("apple", HighDynamic, [0.04, 0.04, 0.04], Small),
        ClassSpec::new("bowl", HighDynamic, [0.08, 0.08, 0.04], Small),
    ]
}
