from setuptools import find_packages, setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="qudithhl",
    version="0.1.0",
    description="Qudit statevector simulator and HHL linear solver for qubits, qutrits and general d, with a coupled-cluster correlation energy workflow.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.8",
    install_requires=["numpy", "pyyaml", "pandas"],
    extras_require={
        "test": ["pytest"],
        "docs": ["sphinx", "sphinx_rtd_theme", "sphinx_mdinclude"],
    },
    include_package_data=True,
    # Add command line tools
    entry_points={
        "console_scripts": [
            "qudithhl=qudithhl.cli_tools:main",
        ],
    },
    # MIT license
    license="MIT",
)
