"""Constants shared by both kernel backends."""

import numpy as np

# Pade coefficients and 1-norm bounds for scaling-and-squaring (Higham 2005).
PADE = {
    3: np.array([120.0, 60.0, 12.0, 1.0]),
    5: np.array([30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0]),
    7: np.array([17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0]),
    9: np.array([17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                 2162160.0, 110880.0, 3960.0, 90.0, 1.0]),
    13: np.array([64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                  1187353796428800.0, 129060195264000.0, 10559470521600.0,
                  670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
                  960960.0, 16380.0, 182.0, 1.0]),
}
THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}

B3 = PADE[3]
B5 = PADE[5]
B7 = PADE[7]
B9 = PADE[9]
B13 = PADE[13]

# Gauss-Legendre nodes on [0, 1] for the fourth order Magnus step.
GAUSS_LO = 0.5 - np.sqrt(3.0) / 6.0
GAUSS_HI = 0.5 + np.sqrt(3.0) / 6.0
MAGNUS_COMM = np.sqrt(3.0) / 12.0
