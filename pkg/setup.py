import pathlib

from setuptools import find_packages, setup

HERE = pathlib.Path(__file__).parent

long_description = (HERE / "README.md").read_text()


def get_version() -> str:
    fpath = HERE / "clickcraft" / "__init__.py"
    with fpath.open() as f:
        for line in f:
            if line.startswith("__version__"):
                return line.split('"')[1]
    raise Exception(f"version information not found in {fpath}")


setup(
    name="clickcraft",
    version=get_version(),
    packages=find_packages(include=["clickcraft*"]),
    include_package_data=True,
    license="PostgreSQL",
    description=(
        "Quantum state engineering with arrays of on/off photodetectors: "
        "heralding, photon subtraction, addition and amplification"
    ),
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "License :: OSI Approved :: PostgreSQL License",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    keywords="quantum optics photodetector click counting P function",
    python_requires=">=3.9",
    install_requires=[
        "attrs >= 17, !=21.1",
        "click >= 7.1",
        "mpmath >= 1.2",
        "numpy >= 1.20",
        "scipy >= 1.6",
    ],
    extras_require={
        "test": [
            "pytest >= 6.0.2",
        ],
    },
    entry_points={
        "console_scripts": [
            "clickcraft=clickcraft.cli:main",
        ],
    },
    zip_safe=False,
)
