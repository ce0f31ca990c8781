"""Point-pair table for the 256-bit binary descriptor.

Each row is (dx1, dy1, dx2, dy2) relative to the keypoint, drawn once from an
isotropic Gaussian (sigma = 31/5, seed 20211), rounded and clipped to the
31 x 31 patch. Changing this table changes every descriptor and invalidates
stored vocabularies, so it is versioned.
"""

BRIEF_TABLE_VERSION = 1

BRIEF_PAIRS = (
    (5, 7, 5, 3),
    (0, -7, 8, 1),
    (9, -1, -8, -4),
    (-8, -7, -15, 1),
    (7, -1, 1, -7),
    (3, 15, -9, -2),
    (6, -5, -1, -14),
    (11, -6, 5, 5),
    (-2, 0, 6, -4),
    (-5, -7, 12, -2),
    (-9, 6, -13, -2),
    (-3, 0, 4, 2),
    (10, 0, -6, 10),
    (-5, -7, -2, -6),
    (-1, 1, -15, -8),
    (0, 5, -5, 8),
    (2, -6, -4, 8),
    (5, 5, -2, -3),
    (-2, -6, -9, 4),
    (-1, 2, 1, -11),
    (0, -3, 7, 5),
    (4, 0, -7, 7),
    (-1, 1, -7, 1),
    (-1, -3, 6, -6),
    (13, 2, 4, 0),
    (2, -3, 6, 6),
    (1, -1, -3, -1),
    (0, -8, 0, 3),
    (-3, 0, 0, 0),
    (-7, -4, 5, 7),
    (0, -2, -3, 6),
    (-4, 1, 4, 1),
    (0, -3, -3, -15),
    (-9, 2, 5, 14),
    (-5, 8, -15, -6),
    (4, -3, 3, -2),
    (-6, -3, 3, 1),
    (11, -6, 2, -4),
    (-8, 5, -15, -8),
    (-4, 9, 3, -3),
    (-8, -3, -8, 1),
    (-7, 4, 5, 9),
    (-4, 2, 6, 6),
    (4, 5, 1, -7),
    (-4, 4, 1, -4),
    (5, -8, 5, 0),
    (7, -8, 2, 6),
    (-5, 10, -2, 5),
    (0, -2, 0, -1),
    (-1, 0, 2, -9),
    (-10, 5, -7, -5),
    (0, -5, -2, 5),
    (-4, 5, 1, 5),
    (-11, 3, -5, 4),
    (7, 2, 0, -7),
    (-3, 0, 15, -6),
    (2, -14, 2, 0),
    (0, 5, -3, -5),
    (0, -7, 7, -2),
    (2, 3, 1, 15),
    (-9, -7, -7, -7),
    (2, -1, -1, 2),
    (-1, -10, 4, 14),
    (-1, -5, 1, 0),
    (2, -3, -11, 1),
    (-4, -2, -13, 4),
    (-10, -4, 0, 7),
    (-1, 3, -5, -1),
    (-2, -2, -8, 0),
    (14, -4, 0, -5),
    (4, -6, 12, -4),
    (6, 5, 7, -2),
    (-15, 9, 0, -4),
    (0, -2, -3, 0),
    (-3, 3, 0, 9),
    (-1, 0, 0, 15),
    (-10, -4, 0, -6),
    (-4, -11, 3, -2),
    (1, -3, 6, 3),
    (-6, 3, -4, 0),
    (1, 7, 8, -4),
    (2, 0, 4, 4),
    (-6, 5, -5, 2),
    (-2, -15, 6, 3),
    (-5, 4, -3, -9),
    (4, -2, -4, 5),
    (-1, 6, -9, -8),
    (-7, 0, -14, -9),
    (-5, 0, -8, -1),
    (-10, 2, -7, 4),
    (6, -3, -7, 3),
    (-5, -10, 2, -3),
    (-1, 7, -7, -1),
    (-9, -9, -10, 6),
    (-6, -9, 6, 10),
    (2, -4, 0, 1),
    (4, -5, -12, 9),
    (0, -13, 1, 0),
    (7, 6, 12, -9),
    (1, 11, 13, -3),
    (3, 11, 3, -6),
    (-1, 2, -2, 3),
    (15, 10, -2, 5),
    (4, 8, 5, -3),
    (-1, -2, -6, -10),
    (6, 10, 2, 8),
    (14, 2, -3, 2),
    (2, 7, 0, 9),
    (-5, 11, -4, 3),
    (4, 0, -4, -8),
    (-3, 0, 7, 8),
    (-5, 11, -9, 3),
    (-5, 4, -4, 0),
    (5, -2, -3, -5),
    (1, 4, 0, -8),
    (-5, 10, -9, 10),
    (-4, 1, 4, -2),
    (-11, -6, 4, -2),
    (11, 3, 0, 1),
    (13, -8, -6, 3),
    (1, -9, -11, 3),
    (-7, -4, -6, -5),
    (-5, -2, -2, -9),
    (-13, -1, -10, -3),
    (8, 6, 5, 2),
    (0, 0, 2, 3),
    (4, -6, 2, 7),
    (3, 1, 13, -1),
    (-10, 2, -1, 6),
    (15, -11, -7, 5),
    (-1, 6, -5, -3),
    (1, 6, 5, -2),
    (2, 1, 2, -1),
    (4, 7, 7, 10),
    (-13, -5, -7, 8),
    (-10, -1, -1, 4),
    (-5, 8, -3, -12),
    (14, 12, 8, 2),
    (-1, 1, 0, -3),
    (-2, -11, -3, -1),
    (-1, 2, 6, -9),
    (-6, 7, -7, -3),
    (6, 5, 0, 13),
    (7, -10, 6, 0),
    (-13, 0, -9, 15),
    (0, -3, 8, -3),
    (10, 1, 0, 8),
    (-2, 15, -7, 10),
    (8, -4, 1, 2),
    (-3, -1, -9, 5),
    (-14, 8, -5, 7),
    (6, -6, 8, -15),
    (-4, -4, 2, -3),
    (-3, 5, 5, 1),
    (-4, 3, -1, -4),
    (5, 1, 15, -3),
    (0, 4, 4, 7),
    (2, 4, 5, 0),
    (-3, -12, -2, -2),
    (3, 0, 2, -5),
    (-1, 1, -7, -5),
    (-4, 6, 7, -1),
    (2, -11, -5, -1),
    (4, -1, 6, 0),
    (6, 1, 3, -6),
    (-7, -5, 1, -7),
    (7, -3, -3, -5),
    (0, 0, 2, 5),
    (-1, -6, 10, 5),
    (-4, -3, 4, 9),
    (2, 4, -1, -8),
    (2, 8, -2, 2),
    (7, 0, -4, -4),
    (4, 7, 6, -15),
    (-8, 4, -8, 11),
    (1, 5, -1, 6),
    (-10, 3, -4, 7),
    (7, -1, 2, -2),
    (9, 2, 2, -3),
    (1, -6, 0, -7),
    (6, -4, 5, 9),
    (-1, -5, 3, 8),
    (-10, 6, 0, -6),
    (8, 1, 7, -2),
    (1, 7, -1, -3),
    (0, 2, -3, -4),
    (-6, 4, 2, 9),
    (-1, 7, 1, -9),
    (-4, -1, -5, 2),
    (9, -8, 4, 2),
    (-1, -5, 0, -5),
    (4, 8, 1, 2),
    (1, 10, -9, 13),
    (-2, 2, -1, 7),
    (5, -2, -7, 4),
    (1, -4, -10, -5),
    (5, 9, 15, 2),
    (6, -15, -1, 4),
    (7, 2, 1, 4),
    (1, -5, -10, -5),
    (-5, 11, -2, 8),
    (4, -8, -10, 1),
    (-5, 1, 5, 4),
    (3, 3, -6, -3),
    (6, -6, -3, 3),
    (1, 2, 7, -1),
    (-1, 14, -10, -1),
    (2, -3, 5, -1),
    (-11, 6, -8, -1),
    (-1, -8, 0, 2),
    (7, -10, -2, -10),
    (-6, -4, -11, 1),
    (12, -2, -11, 5),
    (-5, 1, -7, -5),
    (-2, 10, 2, 8),
    (-1, -1, 0, -6),
    (-5, 1, -8, 9),
    (4, 5, -14, -1),
    (4, 12, 6, -11),
    (-12, -3, 3, 3),
    (3, -4, 7, 0),
    (7, 4, -6, 9),
    (10, -4, -3, -2),
    (9, -4, 1, -3),
    (-1, 3, 3, -2),
    (-9, 6, -11, -5),
    (-2, 3, -3, -3),
    (2, 9, -2, -5),
    (-12, -1, 2, 7),
    (4, 0, -4, 0),
    (2, 8, 2, 1),
    (3, 3, -12, 10),
    (6, -1, -2, -4),
    (-4, 10, 6, -3),
    (9, 1, 0, 1),
    (0, -4, 9, 15),
    (2, -12, -11, -9),
    (9, 7, 7, -2),
    (1, 0, -1, -1),
    (-9, 10, -2, -5),
    (3, -9, 1, 10),
    (0, 9, 10, 0),
    (-14, -6, -3, 5),
    (2, -6, -3, -7),
    (-7, 2, -2, 4),
    (-5, -6, 2, 6),
    (3, 5, 11, 2),
    (1, -9, 5, 5),
    (3, -6, 4, -2),
    (2, 2, -10, 2),
    (5, -4, -4, -3),
    (15, -12, -1, -2),
    (9, 5, 4, -3),
    (-2, 15, -1, -13),
    (1, -6, 6, 2),
    (5, -4, -4, 6),
)
