//! Fixed room layouts per game. Pellet and agent placement is random at reset;
//! walls, doors and the button are not.

use crate::gridworld::config::{GameConfig, GameId};
use crate::gridworld::tile::{Pos, TileKind};

#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    /// Total width including the border wall.
    pub width: usize,
    pub height: usize,
    /// Static tiles: floor, walls, button and closed doors.
    pub base: Vec<TileKind>,
    pub la_spawn: Vec<Pos>,
    pub ia_spawn: Vec<Pos>,
    pub la_pellet_cells: Vec<Pos>,
    pub ia_pellet_cells: Vec<Pos>,
    /// Cells behind a door that receive exactly one IA pellet (Assistive 2).
    pub locked_ia_pellet_cells: Vec<Pos>,
    /// Minimum Chebyshev distance between the agents at reset.
    pub min_spawn_distance: i32,
}

impl Layout {
    pub fn index(&self, p: Pos) -> usize {
        p.y as usize * self.width + p.x as usize
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    pub fn tile(&self, p: Pos) -> TileKind {
        if self.in_bounds(p) {
            self.base[self.index(p)]
        } else {
            TileKind::Wall
        }
    }

    pub fn build(config: &GameConfig) -> Self {
        let (w, h) = (config.width as i32, config.height as i32);
        let width = config.width + 2;
        let height = config.height + 2;
        let mut base = vec![TileKind::Floor; width * height];
        for y in 0..height {
            for x in 0..width {
                if x == 0 || y == 0 || x == width - 1 || y == height - 1 {
                    base[y * width + x] = TileKind::Wall;
                }
            }
        }
        let mut layout = Layout {
            width,
            height,
            base,
            la_spawn: Vec::new(),
            ia_spawn: Vec::new(),
            la_pellet_cells: Vec::new(),
            ia_pellet_cells: Vec::new(),
            locked_ia_pellet_cells: Vec::new(),
            min_spawn_distance: 1,
        };
        let set = |l: &mut Layout, p: Pos, t: TileKind| {
            let i = l.index(p);
            l.base[i] = t;
        };

        // Enclosed 2-wide pocket cells, filled below per game.
        let mut pocket: Vec<Pos> = Vec::new();
        match config.game {
            GameId::Assistive1 => {
                // The independent agent starts in a room in the north-east
                // corner; its only exit is a door on the room's west wall.
                for y in 1..=4 {
                    set(&mut layout, Pos::new(w - 2, y), TileKind::Wall);
                }
                for x in (w - 2)..=w {
                    set(&mut layout, Pos::new(x, 4), TileKind::Wall);
                }
                set(&mut layout, Pos::new(w - 2, 2), TileKind::DoorClosed);
                set(&mut layout, Pos::new(w - 4, 3), TileKind::Button);
                for y in 1..=3 {
                    for x in (w - 1)..=w {
                        pocket.push(Pos::new(x, y));
                    }
                }
            }
            GameId::Assistive2 => {
                // A 2x2 closet in the south-east corner holds one IA pellet;
                // the button sits in front of its door.
                for y in (h - 2)..=h {
                    set(&mut layout, Pos::new(w - 2, y), TileKind::Wall);
                }
                for x in (w - 2)..=w {
                    set(&mut layout, Pos::new(x, h - 2), TileKind::Wall);
                }
                set(&mut layout, Pos::new(w - 2, h - 1), TileKind::DoorClosed);
                set(&mut layout, Pos::new(w - 3, h - 1), TileKind::Button);
                for y in (h - 1)..=h {
                    for x in (w - 1)..=w {
                        pocket.push(Pos::new(x, y));
                    }
                }
            }
            GameId::Adversarial1 | GameId::Adversarial2 => {
                set(&mut layout, Pos::new((w + 1) / 2, (h + 1) / 2), TileKind::Button);
                layout.min_spawn_distance = 3;
            }
        }

        let open: Vec<Pos> = (1..=h)
            .flat_map(|y| (1..=w).map(move |x| Pos::new(x, y)))
            .filter(|&p| layout.tile(p) == TileKind::Floor && !pocket.contains(&p))
            .collect();

        match config.game {
            GameId::Assistive1 => {
                layout.la_spawn = open.clone();
                layout.ia_spawn = pocket;
                layout.la_pellet_cells = open.clone();
                layout.ia_pellet_cells = open;
            }
            GameId::Assistive2 => {
                layout.la_spawn = open.clone();
                layout.ia_spawn = open.clone();
                layout.la_pellet_cells = open.clone();
                layout.ia_pellet_cells = open;
                layout.locked_ia_pellet_cells = pocket;
            }
            GameId::Adversarial1 | GameId::Adversarial2 => {
                layout.la_spawn = open.clone();
                layout.ia_spawn = open.clone();
                layout.la_pellet_cells = open.clone();
                layout.ia_pellet_cells = open;
            }
        }
        layout
    }

    /// Text render of the static layout.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                s.push(self.base[y * self.width + x].glyph());
            }
            s.push('\n');
        }
        s
    }
}
