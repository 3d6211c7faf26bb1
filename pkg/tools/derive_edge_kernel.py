"""Derive the closed-form kernel for a straight dislocation with piecewise
quadratic slip by integrating the classical plane-strain edge-dislocation
displacement field twice along the slip direction.

A point edge dislocation with unit Burgers vector along x (glide plane y=0)
has the displacement field

    u_x =  (1/2pi) [ atan2(y,x) + (lam+mu)/(lam+2mu) * x*y/r^2 ]
    u_y = -(1/2pi) [ mu/(2(lam+2mu)) * log(r^2)
                     + (lam+mu)/(2(lam+2mu)) * (x^2-y^2)/r^2 ]

A slip distribution b(xi) on a straight fault equals a superposition of
point dislocations with density -b'(xi).  Two integrations by parts turn the
convolution into a finite combination of the double x-antiderivative U2
evaluated at the breakpoints of b'' (piecewise quadratic slip => b'' is
piecewise constant).  Terms that are affine in x, or functions of y alone,
cancel in that combination because the b'' jump coefficients sum to zero and
have zero first moment, so the branch choice atan2(y,x) -> -atan(x/y) is
immaterial for the superposed field.

Prints U = 2*U2 and its first derivatives, plus verification output.
"""

import sympy as sp

x, y, lam, mu = sp.symbols("x y lam mu", real=True)
r2 = x**2 + y**2
a = (lam + mu) / (lam + 2 * mu)
c_ln = mu / (2 * (lam + 2 * mu))

# working branch: atan2(y,x) = pi/2*sign(y) - atan(x/y); the sign(y) part is
# a pure function of y and cancels in the superposition
ux = (1 / (2 * sp.pi)) * (-sp.atan(x / y) + a * x * y / r2)
uy = -(1 / (2 * sp.pi)) * (c_ln * sp.log(r2) + (a / 2) * (x**2 - y**2) / r2)

# equilibrium of the point field: mu*lap(u) + (lam+mu)*grad(div u) = 0
div_u = sp.diff(ux, x) + sp.diff(uy, y)
nav_x = mu * (sp.diff(ux, x, 2) + sp.diff(ux, y, 2)) + (lam + mu) * sp.diff(div_u, x)
nav_y = mu * (sp.diff(uy, x, 2) + sp.diff(uy, y, 2)) + (lam + mu) * sp.diff(div_u, y)
print("point-field equilibrium residual:", sp.simplify(nav_x), sp.simplify(nav_y))

# double antiderivative in x and the doubled kernel used by the superposition
U2x = sp.integrate(sp.integrate(ux, x), x)
U2y = sp.integrate(sp.integrate(uy, x), x)
Ux = sp.simplify(sp.expand(2 * U2x))
Uy = sp.simplify(sp.expand(2 * U2y))
print("\nU_x =", sp.simplify(Ux))
print("\nU_y =", sp.simplify(Uy))

# check d^2/dx^2 U = 2*u
print("\nd2Ux check:", sp.simplify(sp.diff(Ux, x, 2) - 2 * ux))
print("d2Uy check:", sp.simplify(sp.diff(Uy, x, 2) - 2 * uy))

for name, expr in [
    ("dUx_dx", sp.diff(Ux, x)),
    ("dUx_dy", sp.diff(Ux, y)),
    ("dUy_dx", sp.diff(Uy, x)),
    ("dUy_dy", sp.diff(Uy, y)),
]:
    print(f"\n{name} =", sp.simplify(expr))
