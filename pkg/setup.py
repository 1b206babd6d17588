from setuptools import setup

with open('requirements.txt') as handle:
    reqs = [line.split('#')[0].strip() for line in handle
            if line.split('#')[0].strip()]

setup(name='inlslab',
      install_requires=[r for r in reqs if not r.startswith(('autopep8', 'coverage', 'pytest'))],
      description='Simulate and verify the inhomogeneous nonlinear Schrödinger equation.',
      long_description='Pseudospectral split-step solver for the inhomogeneous NLS '
                       'with exact exponent arithmetic, Morawetz diagnostics and '
                       'scattering-state extraction.',
      version='0.4.0',
      packages=['inlslab',
                'inlslab.cli',
                'inlslab.tests'],
      entry_points={'console_scripts': ['inlslab = inlslab.cli:main']})
