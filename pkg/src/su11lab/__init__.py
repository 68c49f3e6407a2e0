"""Current-algebra representations of su(1,1): exact and numerical checks.

Subpackages by theme:

* ``su11``, ``orthopoly``: the Lie algebra and the Laguerre/Meixner/Charlier families
* ``fock``, ``unitary``: the extended Fock representation and its unitary group
* ``univariate``, ``gamma``, ``pascal``: one-site models and the Gamma and Pascal pictures
* ``crp``: the table-configuration lift
* ``harness``, ``cli``: batch verification and the ``su11lab`` command
"""

__version__ = "0.1.0"
