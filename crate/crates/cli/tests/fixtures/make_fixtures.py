"""Regenerates the synthetic input traces used by the CLI tests."""

import numpy as np

TAU = 2 * np.pi
GAMMA_E = TAU * 28.0e9


def write(name, header, cols):
    with open(name, "w") as f:
        f.write(",".join(header) + "\n")
        for row in zip(*cols):
            f.write(",".join(repr(float(v)) for v in row) + "\n")


def noisy(rng, clean, snr_db, complex_=False):
    power = np.mean(np.abs(clean) ** 2)
    sigma = np.sqrt(power / 10 ** (snr_db / 10))
    if complex_:
        return clean + sigma / np.sqrt(2) * (rng.standard_normal(clean.size) + 1j * rng.standard_normal(clean.size))
    return clean + sigma * rng.standard_normal(clean.size)


rng = np.random.default_rng(20240601)

# bare resonator seen through a cable: 0.95/0.891 MHz, 35 ns delay
f = np.linspace(9.8e9 - 10e6, 9.8e9 + 10e6, 401)
w, wr = TAU * f, TAU * 9.8e9
ke, ki = TAU * 0.95e6, TAU * 0.891e6
r = 0.02 * np.exp(1j * (0.7 + w * 35e-9)) * (1j * ke / (w - wr + 0.5j * (ke + ki)) - 1)
r = noisy(rng, r, 40.0, complex_=True)
write("reflection.csv", ["freq_hz", "re", "im"], [f, r.real, r.imag])

# amplifier gain: 3/1 MHz resonator, Lorentzian spins 2 MHz wide, gamma 0.18 MHz, g 1.2 MHz
f = np.linspace(9.8e9 - 8e6, 9.8e9 + 8e6, 321)
w = TAU * f
ke, ki, g = TAU * 3e6, TAU * 1e6, TAU * 1.2e6
hw = 0.5 * TAU * (2e6 + 0.18e6)
k = g**2 / (w - wr + 1j * hw)
r = 1j * ke / (w - wr + 0.5j * (ke + ki) + k) - 1
gain = 20 * np.log10(np.abs(r))
write("gain.csv", ["freq_hz", "gain_db"], [f, noisy(rng, gain, 40.0)])

# field-swept Gaussian line, sigma 119 uT
b = np.linspace(0.35 - 6 * 119e-6, 0.35 + 6 * 119e-6, 301)
line = 2.0 * np.exp(-0.5 * ((b - 0.35) / 119e-6) ** 2)
write("line.csv", ["b0_t", "signal"], [b, noisy(rng, line, 40.0) + 0.1])

# T1 recovery: 6.65 ms
t = np.arange(200) * 0.2e-3
y = 1.3 * np.exp(-t / 6.65e-3)
write("decay.csv", ["time_s", "signal"], [t, noisy(rng, y, 40.0) + 0.02])
