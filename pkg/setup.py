from setuptools import setup, find_packages

setup(
    name="oto-clock",
    version="0.1.0",
    description="Quantum-clock simulation of out-of-time-order correlators in cavity/qubit lattices.",
    author="Hamish Burke",
    author_email="hamishapps@gmail.com",  # Optional
    packages=find_packages(exclude=["tests", "examples"]),
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.7",
        "python-dotenv",
        "tqdm"
    ],
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires='>=3.8',
)
