from setuptools import setup, find_packages

# Read the long description from README.md using a context manager.
with open('README.md', encoding='utf-8') as fh:
    long_description = fh.read()

setup(
    name='spoofguard',
    version='0.1.0',
    packages=find_packages(include=['spoofguard', 'spoofguard.*']),
    install_requires=[
        'numpy>=1.26',
        'scipy>=1.11',
        'rich>=13.9.4',
    ],
    extras_require={
        'test': ['pytest>=8.0'],
    },
    entry_points={
        'console_scripts': ['spoofguard=spoofguard.cli:main'],
    },
    description='Audio anti-spoofing countermeasure toolkit with EER and t-DCF evaluation.',
    long_description=long_description,
    long_description_content_type='text/markdown',
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
    ],
    python_requires='>=3.10',
)
