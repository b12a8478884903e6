import setuptools
import os

FILE_PATH = os.path.dirname(os.path.realpath(__file__))

with open(os.path.join(FILE_PATH, "README.md"), "r") as fh:
    long_description = fh.read()

requirements_path = os.path.join(FILE_PATH, "requirements.txt")
with open(requirements_path) as f:
    required = f.read().splitlines()

setuptools.setup(
    name="pybpmf",
    version="0.1.0",
    description="Iterative MIMO-OFDM receiver built on a hybrid BP/MF message-passing rule",
    long_description=long_description,
    long_description_content_type="text/markdown",
    include_package_data=True,
    package_data={"": ["*.config"]},
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    install_requires=required,
    entry_points={"console_scripts": ["pybpmf = pybpmf.cli:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
    ],
    python_requires=">=3.8",
)
