import re

try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup

from codecs import open

with open('lwfr/version.py', 'r') as fd:
    version = re.search(r'^__version__\s*=\s*[\'"]([^\'"]*)[\'"]',
                        fd.read(), re.MULTILINE).group(1)

setup(
    name='LWFR-Solver',
    version=version,
    description='Lax-Wendroff flux reconstruction for advection-diffusion and Navier-Stokes',
    long_description=open('README.rst').read(),
    license='MIT',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Intended Audience :: Science/Research',
        'Operating System :: OS Independent',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    keywords=['CFD', 'flux reconstruction', 'Lax-Wendroff'],
    packages=['lwfr'],
    install_requires=['numpy', 'scipy'],
    entry_points={'console_scripts': ['lwfr = lwfr.cli:main']},
)
