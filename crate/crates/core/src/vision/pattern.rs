// Generated once: N(0, 6.2) offsets clipped to +/-15, numpy default_rng(20240607).
// Each entry is (ux, uy, vx, vy); bit k compares smoothed I(p + u) < I(p + v).
pub(super) const PATTERN: [[i8; 4]; 256] = [
    [-1, -3, -15, 15], [1, 8, 2, -4], [5, -13, 2, 3], [-6, -6, 4, 4],
    [-7, -9, 13, 3], [0, -7, -6, -3], [-3, -4, 13, 4], [-9, 3, -12, -5],
    [-2, 5, -8, -1], [1, -9, -3, 5], [0, -5, -2, 2], [-5, -11, 6, -1],
    [-2, -2, 7, 1], [8, 11, -10, 2], [3, 14, 3, 8], [-7, 2, 1, 4],
    [-6, -4, -4, -4], [2, 1, 4, 7], [-13, -2, 1, -4], [-13, -6, -8, 2],
    [-15, 3, -5, -4], [4, -1, 6, -9], [-7, 2, 3, 0], [-1, -5, 4, 5],
    [-10, -5, 3, -6], [1, -4, 9, 0], [12, 1, 5, 1], [4, 6, -5, 4],
    [0, -15, -1, -9], [1, -7, 2, 0], [-3, 3, -2, 3], [-10, 1, 5, 0],
    [-3, 1, 4, 2], [-5, -9, -2, -8], [-1, 11, -3, 0], [-1, -2, -5, 15],
    [-2, 4, -7, 5], [3, -5, -10, -12], [1, 0, 3, 2], [-1, 3, -12, -3],
    [-9, 13, 4, -2], [-4, 6, -6, 0], [6, 2, -6, 1], [1, -10, 10, -11],
    [-4, 1, -5, 0], [-3, 7, 1, 5], [4, 9, -2, 1], [3, -1, -5, -1],
    [6, 6, 2, 1], [-6, 5, 2, 13], [2, -3, -2, -6], [4, -2, -2, -10],
    [-3, 7, -12, -4], [2, -9, -5, 7], [3, -6, -1, 6], [-5, -5, -7, 0],
    [-4, 8, -1, 1], [7, 1, 13, -5], [-9, -1, -8, 3], [-4, 3, 3, -11],
    [8, -10, 4, -2], [8, 1, 0, 2], [-8, 1, -13, -2], [-12, 0, -5, 1],
    [2, -1, 10, -8], [3, 8, 10, 2], [-14, 5, 0, 0], [7, 0, -2, -1],
    [5, -7, -6, -2], [2, 4, -9, 4], [-4, 7, -5, 0], [6, 8, 1, 0],
    [1, -2, 9, -3], [12, 4, -1, -5], [1, -1, -4, 2], [1, -2, -5, -2],
    [-1, -2, -2, -3], [-2, 13, 6, -6], [1, 7, -4, 7], [-3, 5, 1, -1],
    [5, 4, -9, 5], [8, -1, -9, -6], [4, 1, 8, 7], [5, 4, 2, -9],
    [0, 3, 1, 4], [12, -8, 9, 4], [0, 2, 8, 4], [4, -3, 5, 5],
    [1, -1, -2, -11], [-10, 0, 3, 2], [0, -11, 6, 4], [9, 6, 2, -4],
    [-8, 10, -2, 3], [1, 5, 2, -1], [-3, 4, -6, -5], [-3, 4, -5, 2],
    [0, -2, 0, -6], [2, 12, -5, -1], [-4, 2, -5, 1], [6, 0, -4, -8],
    [-4, 1, 9, -1], [-10, 4, -3, -1], [-8, 1, -15, 15], [-15, 4, -3, 6],
    [3, 15, -10, 1], [-4, -10, -1, 4], [7, -7, 1, 4], [0, -3, -2, -2],
    [6, -4, -3, 5], [-3, 3, -2, -3], [1, -5, -8, -10], [-1, 8, 3, -12],
    [7, -6, 2, -1], [-6, 5, 2, -5], [-3, 0, -2, 8], [-5, 0, 6, 14],
    [4, 11, -8, 2], [0, -7, -5, 1], [6, -1, -1, -3], [10, -4, 2, 1],
    [2, -5, -1, 6], [9, 1, 5, -11], [-8, 6, -3, 4], [-1, 8, 2, 5],
    [-2, -6, -2, -4], [3, 1, 5, -5], [4, 4, 6, 5], [-3, 5, 3, -4],
    [6, 4, 15, 3], [7, 0, 3, -7], [6, -7, -6, 1], [0, 2, 1, -2],
    [7, 2, 5, 5], [-11, -5, -2, 3], [2, -2, -12, 3], [0, -2, 4, 3],
    [-8, 1, -1, -14], [-1, 3, 9, 7], [5, -1, 4, 15], [-7, 3, 0, 4],
    [-6, 2, -15, 2], [-10, 3, 0, 4], [1, -2, -1, 7], [2, -3, 2, 1],
    [2, 3, 15, -11], [-3, 2, 0, -6], [4, -8, 9, 7], [-9, -4, -6, 6],
    [-3, -1, -7, 3], [-3, 5, 8, -8], [-6, -6, 8, -2], [-2, 11, -1, 3],
    [1, 6, 3, 3], [-6, 7, 2, 12], [13, 12, -2, 8], [-15, -11, 2, -5],
    [4, 6, -3, 7], [0, 0, 11, 1], [7, -5, 12, -7], [6, 0, 3, 13],
    [-6, -2, -7, 5], [7, 4, 5, -5], [1, -8, 7, 1], [-3, 6, -8, 11],
    [-6, 4, -5, 0], [0, -1, 4, 3], [3, 0, 7, -7], [9, 6, 0, 2],
    [-6, 1, 9, -1], [4, 0, -2, 1], [-13, 2, 2, 2], [-13, 2, 0, 4],
    [3, -1, -11, 0], [0, 2, -3, -3], [11, 3, 2, -1], [-4, 5, -15, 8],
    [7, 7, 3, 0], [5, 0, -8, 0], [8, -4, -6, 5], [-2, 5, 6, 5],
    [2, 7, 0, 6], [-3, 7, 8, 13], [8, -8, 6, -12], [7, 0, 4, -14],
    [0, -4, 2, -1], [8, 3, -8, 7], [0, 3, -3, 3], [11, 1, 7, 4],
    [6, 2, 2, -5], [3, 10, 7, 2], [0, 4, 4, -7], [5, 4, -10, 4],
    [-4, -13, 6, 1], [-4, -13, -9, -8], [-2, 1, 7, 8], [4, 4, 6, 0],
    [4, -11, 5, 4], [-7, -2, -14, 3], [4, -3, -7, 4], [3, -5, -1, -10],
    [12, 1, 9, 0], [4, -4, -10, 4], [-5, 0, 1, -1], [1, 5, 3, -2],
    [15, 6, -5, -5], [1, -5, 14, -3], [3, -3, -7, -6], [5, -5, -9, -1],
    [-8, 6, -6, -1], [0, 1, 2, -6], [-5, 8, -9, -3], [-2, -9, 3, -6],
    [8, 9, -8, -8], [-2, 8, 3, 5], [-11, 0, -2, 3], [12, -3, -3, 3],
    [-4, 1, -7, -4], [3, -1, 2, -6], [0, 3, 2, -2], [-4, -12, -11, 5],
    [-11, 8, 12, -8], [5, -3, 7, -13], [-2, 3, -12, -6], [-3, 8, 6, -3],
    [-2, 5, -5, 4], [3, 0, 7, -2], [5, -4, -3, 4], [-9, -3, 7, -6],
    [-14, 3, -9, -1], [11, 0, 4, 4], [8, -1, -2, 4], [-12, 6, -4, -11],
    [-5, -8, 1, 10], [5, -7, -12, 10], [-8, 0, -11, 10], [-8, 4, 12, -15],
    [-5, 8, 7, -4], [-2, -10, 8, -3], [10, -7, 3, 15], [3, -2, 0, -3],
    [-3, -4, -5, -5], [-7, 4, -4, -1], [-3, 4, -3, -3], [-3, 5, -4, -3],
    [2, 1, -7, -5], [-12, 0, 3, -6], [8, 6, 2, 2], [2, -2, 7, -7],
    [-3, 5, 1, -3], [8, -8, 5, 2], [0, -3, -6, -15], [-2, 3, -1, -7],
    [-5, -1, 10, 5], [1, -11, -7, -2], [-3, 10, 8, -2], [3, -8, 8, 0],
];
