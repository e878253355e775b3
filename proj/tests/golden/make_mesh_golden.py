# Catenoid mesh oracle from the closed-form primitive, x0 = 1, L = A(0.5, 2), 8 x 32.
import cmath, math

def u(z):
    F = lambda w: (0.5 * (-1 / w - w), 0.5j * (-1 / w + w))
    a, b = F(z), F(1.0)
    return ((a[0] - b[0]).real, (a[1] - b[1]).real, math.log(abs(z)))

n_r, n_t = 8, 32
with open("catenoid_8x32.obj", "w") as out:
    for i in range(n_r):
        r = 0.5 + 1.5 * i / (n_r - 1)
        for q in range(n_t):
            x, y, zc = u(cmath.rect(r, 2 * math.pi * q / n_t))
            out.write("v %.17g %.17g %.17g\n" % (x, y, zc))
    for i in range(n_r - 1):
        for q in range(n_t):
            a = i * n_t + q + 1
            b = i * n_t + (q + 1) % n_t + 1
            out.write("f %d %d %d\nf %d %d %d\n" % (a, b, b + n_t, a, b + n_t, a + n_t))
